use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use log::{info, warn};
use rayon::prelude::*;

use morphseg::datasets::{
    corpus_stats, crosslingual_augment, exclude_overlap, parse_fraction, resample_by_category, stratified_split,
    SplitSpec, DEFAULT_SEED,
};
use morphseg::eval::{analyze_by_length, best_per_category, best_to_tsv, evaluate_sentences, evaluate_words, LengthBucket};
use morphseg::hmm::{em_train, hmm_init_supervised, hmm_init_unsupervised, HmmConfig};
use morphseg::labeler::{train_tagger, LabelerConfig};
use morphseg::segmenter::count_words;
use morphseg::sentence::{segment_sentence, train_context, ContextModel};
use morphseg::subword::{bpe_train, morfessor_train, ulm_train, wordpiece_train, MorfessorConfig, UlmConfig};
use morphseg::tsv::{write_sentence_tsv, write_word_tsv, DatasetKind, WordColumns};
use morphseg::wikt::{extract_compounds, read_pages, root_filter};
use morphseg::{CategoryMask, Dataset, MatchPolicy, MetricsReport, SavedModel, WordCounts, WordEntry};

use crate::error::{usage, CliError};
use crate::io::{
    create, language_of, load_model, read_any, read_sentences, read_text, read_word_list, read_words, save_model,
    write_text,
};
use crate::settings::Settings;
use crate::{
    AnalyzeArgs, AugmentArgs, EvaluateArgs, ExtractArgs, ModelKind, OutputFormat, ResampleArgs, RootsArgs,
    SegmentArgs, SplitArgs, StatsArgs, TrainArgs,
};

const DEFAULT_MERGES: usize = 8000;
const DEFAULT_VOCAB: usize = 8000;

pub fn split(args: &SplitArgs, settings: &Settings) -> Result<(), CliError> {
    let fraction = |flag: &Option<String>, key: &str, default: (u64, u64)| -> Result<_, CliError> {
        match settings.pick_text(flag.clone(), key)? {
            Some(text) => Ok(parse_fraction(&text)?),
            None => Ok(morphseg::datasets::Fraction::new(default.0, default.1)),
        }
    };
    let spec = SplitSpec::new(
        fraction(&args.train, "train", (8, 10))?,
        fraction(&args.dev, "dev", (1, 10))?,
        fraction(&args.test, "test", (1, 10))?,
        settings.pick_or(args.seed, "seed", DEFAULT_SEED)?,
    )?;
    let (mut data, columns) = read_words(&args.input)?;
    if columns != WordColumns::Three {
        return Err(usage("split needs a 3-column file (word, segmentation, category)"));
    }
    if let Some(exclude) = settings.pick(args.exclude.clone(), "exclude")? {
        let protected = read_sentences(&exclude)?;
        let (kept, removed) = exclude_overlap(&data, &protected)?;
        info!("excluded {removed} entries found in {}", exclude.display());
        eprintln!("excluded\t{removed}");
        data = kept;
    }
    let (train, dev, test) = stratified_split(&data, &spec)?;
    let prefix = match &args.prefix {
        Some(p) => p.clone(),
        None => file_stem(&args.input),
    };
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    for (name, part) in [("train", &train), ("dev", &dev), ("test", &test)] {
        let path = args.out_dir.join(format!("{prefix}.{name}.tsv"));
        let mut out = create(&path)?;
        write_word_tsv(&mut out, part.word_entries()?, columns)?;
        out.flush()?;
        println!("# {name}: {}", path.display());
        print!("{}", corpus_stats(part)?.to_tsv());
    }
    Ok(())
}

fn file_stem(path: &Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("data");
    name.strip_suffix(".tsv").unwrap_or(name).to_string()
}

fn supervised(data: &Dataset, columns: WordColumns, kind: &str) -> Result<(), CliError> {
    if columns == WordColumns::One {
        return Err(usage(format!(
            "--model {kind} needs segmented training data; {} has one column",
            data.language
        )));
    }
    Ok(())
}

fn word_counts(entries: &[WordEntry]) -> WordCounts {
    count_words(entries.iter().map(|e| e.word.as_str()))
}

pub fn train(args: &TrainArgs, settings: &Settings) -> Result<(), CliError> {
    let kind = settings
        .pick(args.model, "model")?
        .ok_or_else(|| usage("--model is required"))?;
    let seed = settings.pick_or(args.seed, "seed", DEFAULT_SEED)?;
    let epochs = settings.pick::<usize>(args.epochs, "epochs")?;
    let em_iters = settings.pick::<usize>(args.em_iters, "em-iters")?;
    let tol = settings.pick::<f64>(args.tol, "tol")?;

    if kind == ModelKind::Context {
        let data = read_sentences(&args.input)?;
        let entries = data.sentence_entries()?;
        if entries.iter().any(|s| s.segmented.is_none()) {
            return Err(usage("--model context needs a 2-column sentence-level file"));
        }
        let model = train_context(entries)?;
        println!("context\tsentences={}\twords={}\tneighbors={}", entries.len(), model.n_words(), model.n_neighbor_keys());
        return save_model(&args.out, &SavedModel::Context(model));
    }

    let (data, columns) = read_words(&args.input)?;
    let entries = data.word_entries()?;
    if entries.is_empty() {
        return Err(CliError::Runtime(anyhow::anyhow!("{} is empty", args.input.display())));
    }
    let words = word_counts(entries);
    let model = match kind {
        ModelKind::Bpe => {
            let merges = settings.pick_or(args.merges, "merges", DEFAULT_MERGES)?;
            let table = bpe_train(&words, merges);
            println!("bpe\tmerges={}", table.merges.len());
            SavedModel::Bpe(table)
        }
        ModelKind::Wordpiece => {
            let size = settings.pick_or(args.vocab_size, "vocab-size", DEFAULT_VOCAB)?;
            let vocab = wordpiece_train(&words, size);
            println!("wordpiece\tvocab={}", vocab.len());
            SavedModel::Wordpiece(vocab)
        }
        ModelKind::Ulm => {
            let mut config = UlmConfig {
                vocab_size: settings.pick_or(args.vocab_size, "vocab-size", DEFAULT_VOCAB)?,
                ..UlmConfig::default()
            };
            if let Some(n) = em_iters {
                config.em_iters = n;
            }
            let (vocab, trace) = ulm_train(&words, &config)?;
            let ll = trace.em_log_likelihoods.last().copied().unwrap_or(f64::NAN);
            println!("ulm\tvocab={}\tem_passes={}\tlog_likelihood={ll:.4}", vocab.len(), trace.em_log_likelihoods.len());
            SavedModel::Ulm(vocab)
        }
        ModelKind::Morfessor => {
            let mut config = MorfessorConfig::default();
            if let Some(n) = epochs {
                config.max_epochs = n;
            }
            if let Some(t) = tol {
                config.tolerance = t;
            }
            let (model, trace) = morfessor_train(&words, &config);
            println!("morfessor\tepochs={}\tcost={:.4}", trace.epochs, model.total_cost());
            SavedModel::Morfessor(model)
        }
        ModelKind::Labeler => {
            supervised(&data, columns, "labeler")?;
            let mut config = LabelerConfig { seed, ..LabelerConfig::default() };
            if let Some(n) = epochs {
                config.epochs = n;
            }
            let model = train_tagger(entries, &config)?;
            println!("labeler\tepochs={}\trewrites={}", config.epochs, model.rewrites.non_final.len() + model.rewrites.final_.len());
            SavedModel::Labeler(model)
        }
        ModelKind::Hmm => SavedModel::Hmm(train_hmm(args, settings, &data, columns, em_iters, tol)?),
        ModelKind::Context => unreachable!("handled above"),
    };
    save_model(&args.out, &model)
}

fn train_hmm(
    args: &TrainArgs,
    settings: &Settings,
    data: &Dataset,
    columns: WordColumns,
    em_iters: Option<usize>,
    tol: Option<f64>,
) -> Result<morphseg::HmmModel, CliError> {
    let defaults = HmmConfig::default();
    let config = HmmConfig {
        max_affix_len: settings.pick_or(args.max_affix_len, "max-affix-len", defaults.max_affix_len)?,
        max_candidates: settings.pick_or(args.max_candidates, "max-candidates", defaults.max_candidates)?,
        compounds: settings.flag(args.compounds, "compounds")?,
        em_iters: em_iters.unwrap_or(defaults.em_iters),
        tol: tol.unwrap_or(defaults.tol),
        ..defaults
    };
    let entries = data.word_entries()?;
    let unsupervised = settings.flag(args.unsupervised, "unsupervised")?;
    let init = if unsupervised {
        hmm_init_unsupervised(&word_counts(entries), &config)?
    } else {
        supervised(data, columns, "hmm")?;
        hmm_init_supervised(entries, &config)?
    };
    if config.em_iters == 0 {
        println!("hmm\tem_iters=0");
        return Ok(init);
    }
    let mut words = word_counts(entries);
    let before = words.len();
    words.retain(|w, _| init.is_derivable(w));
    if words.len() < before {
        warn!("{} word types have no derivation and are left out of EM", before - words.len());
    }
    let (model, trace) = em_train(&init, &words, config.em_iters, config.tol)?;
    let ll = trace.log_likelihoods.last().copied().unwrap_or(f64::NAN);
    println!(
        "hmm\tem_iters={}\tconverged={}\tlog_likelihood={ll:.4}",
        trace.iterations, trace.converged
    );
    Ok(model)
}

fn word_model(path: &Path) -> Result<SavedModel, CliError> {
    let model = load_model(path)?;
    if model.word_segmenter().is_none() {
        return Err(usage(format!(
            "{} is a {} model; --model needs a word-level segmenter",
            path.display(),
            model.kind()
        )));
    }
    Ok(model)
}

pub fn segment(args: &SegmentArgs) -> Result<(), CliError> {
    let model = word_model(&args.model)?;
    let segmenter = model.word_segmenter().expect("checked");
    let text = read_text(&args.input)?;
    let sentence_input = crate::io::looks_like_sentences(&text);

    if args.context.is_none() && !args.no_context {
        if sentence_input {
            return Err(usage(
                "input is sentence-level; pass --context MODEL or --no-context",
            ));
        }
        let (entries, _) = morphseg::tsv::read_word_tsv(std::io::Cursor::new(&text), None)
            .with_context(|| format!("in {}", args.input.display()))?;
        if let Some(e) = entries.iter().find(|e| e.word.chars().any(char::is_whitespace)) {
            return Err(usage(format!("word {:?} contains whitespace; is this a sentence file?", e.word)));
        }
        let predicted: Vec<WordEntry> = entries
            .par_iter()
            .map(|e| {
                let seg = segmenter
                    .segment(&e.word)
                    .with_context(|| format!("segmenting {:?}", e.word))?;
                Ok(WordEntry::new(&e.word)?.with_segmentation(seg))
            })
            .collect::<anyhow::Result<_>>()?;
        let mut out = create(&args.out)?;
        write_word_tsv(&mut out, &predicted, WordColumns::Two)?;
        out.flush()?;
        return Ok(());
    }

    let context = match &args.context {
        Some(path) => match load_model(path)? {
            SavedModel::Context(c) => c,
            other => {
                return Err(usage(format!(
                    "{} is a {} model; --context needs a context model",
                    path.display(),
                    other.kind()
                )))
            }
        },
        None => ContextModel::default(),
    };
    let sentences = morphseg::tsv::read_sentence_tsv(std::io::Cursor::new(&text))
        .with_context(|| format!("in {}", args.input.display()))?;
    let predicted = sentences
        .par_iter()
        .map(|s| segment_sentence(&s.sentence, &context, segmenter))
        .collect::<morphseg::Result<Vec<_>>>()?;
    let mut out = create(&args.out)?;
    write_sentence_tsv(&mut out, &predicted)?;
    out.flush()?;
    Ok(())
}

fn policy(flag: &Option<String>, settings: &Settings) -> Result<MatchPolicy, CliError> {
    match settings.pick_text(flag.clone(), "policy")? {
        Some(p) => Ok(p.parse()?),
        None => Ok(MatchPolicy::default()),
    }
}

fn buckets(flag: &Option<String>, settings: &Settings) -> Result<Option<Vec<LengthBucket>>, CliError> {
    settings
        .pick_text(flag.clone(), "by-length")?
        .map(|text| LengthBucket::parse_list(&text).map_err(|e| usage(e.to_string())))
        .transpose()
}

fn score(gold: &Dataset, pred: &Dataset, policy: MatchPolicy) -> Result<MetricsReport, CliError> {
    if gold.kind() != pred.kind() {
        return Err(usage("gold and prediction files are not the same level (word vs sentence)"));
    }
    Ok(match gold.kind() {
        DatasetKind::Word => evaluate_words(gold, pred, policy)?,
        DatasetKind::Sentence => evaluate_sentences(gold, pred, policy)?,
    })
}

fn predicted_segs(pred: &Dataset) -> Result<Vec<morphseg::Segmentation>, CliError> {
    pred.word_entries()?
        .iter()
        .map(|e| {
            e.segmentation
                .clone()
                .ok_or_else(|| CliError::Runtime(anyhow::anyhow!("prediction for {:?} has no segmentation", e.word)))
        })
        .collect()
}

pub fn evaluate(args: &EvaluateArgs, settings: &Settings) -> Result<(), CliError> {
    let policy = policy(&args.policy, settings)?;
    let format = settings.pick_or(args.format, "format", OutputFormat::Tsv)?;
    let by_category = settings.flag(args.by_category, "by-category")?;
    let buckets = buckets(&args.by_length, settings)?;
    let gold = read_any(&args.gold)?;
    let pred = read_any(&args.pred)?;
    let report = score(&gold, &pred, policy)?;

    let mut stdout = std::io::stdout().lock();
    match format {
        OutputFormat::Json => {
            let mut summary = report.summary();
            if !by_category {
                summary.per_category.clear();
            }
            serde_json::to_writer_pretty(&mut stdout, &summary).context("writing JSON")?;
            writeln!(stdout)?;
        }
        OutputFormat::Tsv => write!(stdout, "{}", report.to_tsv(by_category))?,
    }
    if let Some(buckets) = buckets {
        if gold.kind() == DatasetKind::Sentence {
            return Err(usage("--by-length needs word-level files"));
        }
        let table = analyze_by_length(gold.word_entries()?, &predicted_segs(&pred)?, &buckets, policy)?;
        write!(stdout, "\n{}", table.to_tsv())?;
    }
    Ok(())
}

pub fn analyze(args: &AnalyzeArgs, settings: &Settings) -> Result<(), CliError> {
    let policy = policy(&args.policy, settings)?;
    let buckets = buckets(&args.by_length, settings)?;
    let gold = read_any(&args.gold)?;
    if gold.kind() != DatasetKind::Word {
        return Err(usage("analyze needs word-level files with categories"));
    }
    let mut reports = BTreeMap::new();
    let mut stdout = std::io::stdout().lock();
    for spec in &args.systems {
        let (name, path) = spec
            .split_once('=')
            .ok_or_else(|| usage(format!("--system expects NAME=FILE, got {spec:?}")))?;
        let pred = read_any(Path::new(path))?;
        let report = score(&gold, &pred, policy)?;
        if let Some(buckets) = &buckets {
            let table = analyze_by_length(gold.word_entries()?, &predicted_segs(&pred)?, buckets, policy)?;
            write!(stdout, "# {name}\n{}\n", table.to_tsv())?;
        }
        if reports.insert(name.to_string(), report).is_some() {
            return Err(usage(format!("system {name:?} given twice")));
        }
    }
    write!(stdout, "{}", best_to_tsv(&best_per_category(&reports)))?;
    Ok(())
}

pub fn extract(args: &ExtractArgs) -> Result<(), CliError> {
    let text = read_text(&args.input)?;
    let pages = read_pages(text.as_bytes()).with_context(|| format!("in {}", args.input.display()))?;
    let extraction = extract_compounds(&pages, &args.lang);
    let mut out = create(&args.out)?;
    write_word_tsv(&mut out, extraction.dataset.word_entries()?, WordColumns::Three)?;
    out.flush()?;
    if let Some(path) = &args.review {
        let mut out = create(path)?;
        write_word_tsv(&mut out, &extraction.review, WordColumns::Three)?;
        out.flush()?;
    }
    if let Some(path) = &args.diagnostics {
        let mut text = String::new();
        for (title, d) in &extraction.diagnostics {
            text.push_str(&format!("{title}\t{}\t{}\n", d.offset, d.message));
        }
        write_text(path, &text)?;
    }
    eprintln!(
        "pages\t{}\ncompounds\t{}\nreview\t{}\ndiagnostics\t{}",
        pages.len(),
        extraction.dataset.len(),
        extraction.review.len(),
        extraction.diagnostics.len()
    );
    Ok(())
}

pub fn roots(args: &RootsArgs) -> Result<(), CliError> {
    let inherited = read_word_list(&args.inherited)?;
    let mut removed = Vec::new();
    for path in &args.remove {
        removed.extend(read_word_list(path)?);
    }
    let roots = root_filter(inherited.iter().map(String::as_str), removed.iter().map(String::as_str));
    let mut text = String::new();
    for r in &roots {
        text.push_str(r);
        text.push('\n');
    }
    write_text(&args.out, &text)?;
    eprintln!("inherited\t{}\nroots\t{}", inherited.len(), roots.len());
    Ok(())
}

pub fn stats(args: &StatsArgs, settings: &Settings) -> Result<(), CliError> {
    let format = settings.pick_or(args.format, "format", OutputFormat::Tsv)?;
    let (data, _) = read_words(&args.input)?;
    let histogram = corpus_stats(&data)?;
    match format {
        OutputFormat::Tsv => print!("{}", histogram.to_tsv()),
        OutputFormat::Json => {
            let counts: BTreeMap<String, u64> = histogram.counts.iter().map(|(c, n)| (c.code(), *n)).collect();
            let value = serde_json::json!({ "counts": counts, "total": histogram.total });
            println!("{}", serde_json::to_string_pretty(&value).context("writing JSON")?);
        }
    }
    Ok(())
}

pub fn resample(args: &ResampleArgs, settings: &Settings) -> Result<(), CliError> {
    let seed = settings.pick_or(args.seed, "seed", DEFAULT_SEED)?;
    let mut targets = BTreeMap::new();
    for spec in &args.targets {
        let (code, count) = spec
            .split_once('=')
            .ok_or_else(|| usage(format!("--target expects CODE=COUNT, got {spec:?}")))?;
        let category: CategoryMask = code.parse().map_err(|e: morphseg::Error| usage(e.to_string()))?;
        let count: usize = count
            .parse()
            .map_err(|_| usage(format!("bad count in --target {spec:?}")))?;
        targets.insert(category, count);
    }
    let (data, columns) = read_words(&args.input)?;
    let out_data = resample_by_category(&data, &targets, seed)?;
    let mut out = create(&args.out)?;
    write_word_tsv(&mut out, out_data.word_entries()?, columns)?;
    out.flush()?;
    print!("{}", corpus_stats(&out_data)?.to_tsv());
    Ok(())
}

pub fn augment(args: &AugmentArgs) -> Result<(), CliError> {
    let categories: BTreeSet<CategoryMask> = args
        .categories
        .split(',')
        .map(|c| c.trim().parse().map_err(|e: morphseg::Error| usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    let (target, columns) = read_words(&args.input)?;
    let mut donors = Vec::new();
    for spec in &args.donors {
        let (lang, path) = match spec.split_once('=') {
            Some((lang, path)) => (lang.to_string(), PathBuf::from(path)),
            None => (language_of(Path::new(spec)), PathBuf::from(spec)),
        };
        let (mut donor, _) = read_words(&path)?;
        donor.language = lang;
        donors.push(donor);
    }
    let augmented = crosslingual_augment(&target, &donors, &categories)?;
    let added = augmented.len() - target.len();
    let mut out = create(&args.out)?;
    write_word_tsv(&mut out, augmented.word_entries()?, columns)?;
    out.flush()?;
    eprintln!("added\t{added}");
    Ok(())
}
