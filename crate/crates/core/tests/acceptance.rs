//! End-to-end acceptance checks. Runs as a plain binary: one PASS/FAIL line
//! per criterion, non-zero exit if any fails.

mod common;

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, Read};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use synthqa::context::{build_context, plan_gold, render_fact, FactKind, Statement};
use synthqa::eg::{generate_capped, instantiate, Anchor, Answer, Direction, EgKind, Family, Query, SuperlativeFamily};
use synthqa::pipeline::synth::synthetic_table;
use synthqa::pipeline::{generate_stream, AnswerCategory, CorpusStats, ExampleRecord, GenerateOptions};
use synthqa::sampler::{error_sampling, momentum_sampling, uniform, AccuracyHistory, SamplerConfig, Strategy};
use synthqa::sim::{fig3_sweep, plateau_run, run_simulation};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("t{i}")).collect()
}

fn spans(v: &[&str]) -> Answer {
    Answer::spans(v.iter().map(|s| s.to_string()).collect())
}

fn oracle_equivalence(corpus: &DeskCorpus, build: Duration) -> Outcome {
    let egs: HashSet<EgKind> = corpus.examples.iter().map(|e| e.eg).collect();
    let mut mismatches = Vec::new();
    for ex in &corpus.examples {
        let table = &corpus.tables[ex.table];
        let expected = table_answer(table, &ex.generated.instantiation.query);
        if expected.as_ref() != Some(&ex.generated.answer) || ex.record.answer != ex.generated.answer {
            mismatches.push(ex.generated.instantiation.question.clone());
        }
    }
    let n = corpus.examples.len();
    check(
        n >= 10_000 && egs.len() == 16 && mismatches.is_empty() && build < Duration::from_secs(60),
        format!(
            "{n} examples, {} EGs, {} tables, {} mismatches{}, built in {:.1}s",
            egs.len(),
            corpus.tables.len(),
            mismatches.len(),
            mismatches.first().map(|q| format!(" (first: {q})")).unwrap_or_default(),
            build.as_secs_f64()
        ),
    )
}

fn gold_sufficiency(corpus: &DeskCorpus) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut checks, mut failures) = (0usize, Vec::new());
    for ex in &corpus.examples {
        let table = &corpus.tables[ex.table];
        let q = &ex.generated.instantiation.query;
        let gold = gold_statements(&ex.context);
        let distractors: Vec<&Statement> =
            ex.context.facts.iter().filter(|f| f.kind == FactKind::Distractor).map(|f| &f.statement).collect();
        let mut subsets = vec![Vec::new()];
        for _ in 0..5 {
            subsets.push(distractors.iter().copied().filter(|_| rng.gen_bool(0.5)).collect::<Vec<_>>());
        }
        for kept in subsets {
            let got = FactBase::new(table, gold.iter().copied().chain(kept)).answer(q);
            checks += 1;
            if !fact_answer_matches(q, &ex.generated.answer, &got) {
                failures.push(format!("{} -> {got:?}", ex.generated.instantiation.question));
            }
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{checks} fact-level checks (gold only + 5 distractor subsets each), {} failures{}",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

const QF_QUESTION: &str = "In League Cup of 1990–91 Chelsea F.C. season, which Round had a higher Attendance: QF or QFR?";
const R4_QUESTION: &str = "What was the Result(s) when the Round was R4 in League Cup of 1990–91 Chelsea F.C. season?";

fn worked_example() -> Outcome {
    let t = chelsea();
    let (round, date, opp, att, result) =
        (col(&t, "Round"), col(&t, "Date"), col(&t, "Opponent"), col(&t, "Attendance"), col(&t, "Result"));
    let mut notes = Vec::new();
    let mut ok = true;

    let cmp = Query::Comparison {
        family: Family::Number,
        boolean: false,
        direction: Direction::Greater,
        left: Anchor::new(round, "QF"),
        right: Anchor::new(round, "QFR"),
        value_col: att,
    };
    let cmp = instantiate(&t, "number-comparison.which-had", cmp, Some("higher"));
    let cmp_ok = cmp.as_ref().is_some_and(|g| g.answer == spans(&["QF"]) && g.instantiation.question == QF_QUESTION);
    ok &= cmp_ok;
    notes.push(format!("comparison QF/QFR={}", if cmp_ok { "QF" } else { "wrong" }));

    // anchor R4, hop through attendance and date, land on the result
    let comp = Query::Composition { anchor: Anchor::new(round, "R4"), chain: vec![att, date], target: result };
    let comp_eg = comp.eg();
    let comp = instantiate(&t, "composition-3hop.what-was", comp, None);
    let comp_ok = comp.as_ref().is_some_and(|g| g.answer == spans(&["2-1"]) && g.instantiation.question == R4_QUESTION);
    ok &= comp_ok;
    let short = Query::Composition { anchor: Anchor::new(round, "R4"), chain: vec![date], target: result };
    let short_ok = instantiate(&t, "composition-2hop.what-was", short, None).is_some_and(|g| g.answer == spans(&["2-1"]));
    ok &= short_ok;
    notes.push(format!("composition R4={} ({comp_eg} chain), single-hop chain={}", ok_word(comp_ok), ok_word(short_ok)));

    let sup = Query::Superlative {
        family: SuperlativeFamily::Number,
        direction: Direction::Greater,
        target: opp,
        value_col: att,
        filter: None,
    };
    let sup_g = instantiate(&t, "number-superlative.which-in", sup.clone(), Some("highest"));
    let sup_ok = sup_g.as_ref().is_some_and(|g| g.answer == spans(&["Sheffield Wednesday"]));
    ok &= sup_ok;
    notes.push(format!("superlative={}", ok_word(sup_ok)));

    // the surface forms of the published context, compared case-insensitively
    let facts = [
        render_fact(&t, att, round, &t.rows_where(round, "R4")).text,
        render_fact(&t, date, att, &t.rows_where(att, "9,789")).text,
        render_fact(&t, result, date, &t.rows_where(date, "28 November 1990")).text,
        render_fact(&t, att, opp, &t.rows_where(opp, "Tottenham Hotspur")).text,
        render_fact(&t, att, opp, &t.rows_where(opp, "Sheffield Wednesday")).text,
        render_fact(&t, att, opp, &t.rows_where(opp, "Walsall")).text,
    ];
    let published = [
        "The attendance when the round was R4 was 9,789",
        "The date when the attendance was 9,789 was 28 November 1990",
        "The result when the date was 28 November 1990 was 2-1",
        "The attendances when the opponent was Tottenham Hotspur were 34,178 and 33,861",
        "The attendances when the opponent was Sheffield Wednesday were 34,074 and 34,669",
        "The attendances when the opponent was Walsall were 5,666 and 10,037",
    ];
    let facts_ok = facts.iter().zip(published).all(|(a, b)| a.eq_ignore_ascii_case(b));
    ok &= facts_ok;
    notes.push(format!("facts={}", ok_word(facts_ok)));

    let sup_ctx_ok = plan_gold(&t, &sup).is_some_and(|gold| {
        let ctx = build_context(&t, &gold, &Default::default(), 0);
        published[3..].iter().all(|f| ctx.facts.iter().any(|x| x.text.eq_ignore_ascii_case(f)))
    });
    ok &= sup_ctx_ok;
    notes.push(format!("superlative context={}", ok_word(sup_ctx_ok)));

    // the sampler reaches the published questions when nothing is capped away
    let reach = |eg: EgKind, question: Option<&str>, a: &Answer| {
        generate_capped(&t, eg, 7, usize::MAX)
            .iter()
            .any(|g| &g.answer == a && question.map_or(true, |q| g.instantiation.question == q))
    };
    let reached = [
        ("comparison", reach(EgKind::NumberComparison, Some(QF_QUESTION), &spans(&["QF"]))),
        ("composition", reach(EgKind::Composition3Hop, Some(R4_QUESTION), &spans(&["2-1"]))),
        ("superlative", reach(EgKind::NumberSuperlative, None, &spans(&["Sheffield Wednesday"]))),
    ];
    let reached_ok = reached.iter().all(|(_, b)| *b);
    ok &= reached_ok;
    let list: Vec<String> = reached.iter().map(|(n, b)| format!("{n}={}", ok_word(*b))).collect();
    notes.push(format!("uncapped generator: {}", list.join(" ")));

    // informational: a capped sample may or may not draw these exact ones
    let mut out = Vec::new();
    let input = fs::read(data_path("chelsea.jsonl")).unwrap();
    let opts = GenerateOptions { seed: 7, ..Default::default() };
    generate_stream(&input[..], &mut out, None, &opts).unwrap();
    let recs: Vec<ExampleRecord> =
        String::from_utf8(out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let has = |eg: &[EgKind], a: &Answer| recs.iter().any(|r| eg.contains(&r.eg) && &r.answer == a);
    notes.push(format!(
        "seed 7 capped sample ({} records, not scored): comparison={} composition={} superlative={}",
        recs.len(),
        has(&[EgKind::NumberComparison], &spans(&["QF"])),
        has(&[EgKind::Composition2Hop, EgKind::Composition3Hop], &spans(&["2-1"])),
        has(&[EgKind::NumberSuperlative], &spans(&["Sheffield Wednesday"])),
    ));

    check(ok, notes.join("; "))
}

fn ok_word(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "MISSING"
    }
}

fn sampler_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let n = rng.gen_range(2..=16);
        let ceil: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..=1.0)).collect();
        let acc: Vec<f64> = ceil.iter().map(|c| rng.gen_range(0.0..=*c)).collect();
        let gaps: Vec<f64> = ceil.iter().zip(&acc).map(|(c, a)| c - a).collect();
        let total: f64 = gaps.iter().sum();
        let d = error_sampling(&names(n), &acc, &ceil);
        for (p, g) in d.probs().iter().zip(&gaps) {
            worst = worst.max((p - g / total).abs());
        }
    }
    let error_ok = worst <= 1e-9;

    let h = AccuracyHistory::from_series(names(2), vec![vec![0.0, 0.0, 0.5, 0.9], vec![0.8; 4]]).unwrap();
    let m = momentum_sampling(&h, &SamplerConfig::default());
    let momentum_ok = (m.probs()[0] - 0.99715).abs() <= 1e-5 && (m.probs()[1] - 0.00285).abs() <= 1e-5;

    let config = SamplerConfig::default();
    let mut uniform_ok = true;
    for t in 1..config.window {
        let h = AccuracyHistory::from_series(names(3), (0..3).map(|s| (0..t).map(|i| (i * s) as f64 / 10.0).collect()).collect())
            .unwrap();
        uniform_ok &= momentum_sampling(&h, &config).probs() == uniform(&names(3)).probs();
    }
    for n in [2, 3, 7, 10, 16] {
        let h = AccuracyHistory::from_series(names(n), (0..n).map(|s| vec![0.05 * s as f64; 8]).collect()).unwrap();
        uniform_ok &= momentum_sampling(&h, &config).probs() == uniform(&names(n)).probs();
        let flat = vec![1.0; n];
        uniform_ok &= error_sampling(&names(n), &flat, &flat).probs() == uniform(&names(n)).probs();
    }

    check(
        error_ok && momentum_ok && uniform_ok,
        format!(
            "error max |diff| {worst:.1e}; momentum [{:.5}, {:.5}]; warm-start/plateau uniform={}",
            m.probs()[0],
            m.probs()[1],
            ok_word(uniform_ok)
        ),
    )
}

fn fig3_reproduction() -> Outcome {
    let seeds: Vec<u64> = (0..10).collect();
    let start = Instant::now();
    let reports = fig3_sweep(&SamplerConfig::default(), &seeds).map_err(|e| e.to_string())?;
    let held = reports.iter().filter(|r| r.all_hold()).count();
    let violated: Vec<String> = reports
        .iter()
        .flat_map(|r| r.conditions.iter().filter(|c| !c.ordering_holds).map(move |c| format!("seed {}: {}", r.seed, c.ordering())))
        .collect();
    check(
        held >= 9,
        format!(
            "{held}/10 seeds hold both orderings in {:.1}s{}",
            start.elapsed().as_secs_f64(),
            violated.first().map(|v| format!(" (violated: {v})")).unwrap_or_default()
        ),
    )
}

fn entropy_behavior() -> Outcome {
    let log16 = 16f64.ln();
    let final_h = |s: Strategy, low: Option<f64>| run_simulation(&plateau_run(s, low), 0).unwrap().final_entropy().unwrap();
    let momentum = final_h(Strategy::Momentum, None);
    let error = final_h(Strategy::Error, None);
    let error_low = final_h(Strategy::Error, Some(0.6));
    check(
        (momentum - log16).abs() <= 0.01 && error_low < error,
        format!("log16={log16:.4}; momentum {momentum:.4}; error {error:.4}, with one low ceiling {error_low:.4}"),
    )
}

fn corpus_shape(corpus: &DeskCorpus) -> Outcome {
    let mut stats = CorpusStats::default();
    corpus.examples.iter().for_each(|e| stats.observe(&e.record));
    let pct: Vec<(AnswerCategory, f64)> = AnswerCategory::ALL.iter().map(|&c| (c, stats.percent(c))).collect();
    let kinds_ok = pct.iter().all(|(_, p)| *p >= 5.0);
    let mean_distractors =
        corpus.examples.iter().map(|e| e.record.distractor_count as f64).sum::<f64>() / corpus.examples.len() as f64;
    let max_per_cell = per_table_eg_counts(corpus).into_values().max().unwrap_or(0);

    let report = stats.report();
    let keys: HashSet<&str> = report.lines().filter_map(|l| l.split_once(": ").map(|(k, _)| k)).collect();
    let mut required: Vec<String> = [
        "examples",
        "distinct_questions",
        "distinct_tables",
        "distinct_pages",
        "question_words",
        "context_words",
        "gold_facts",
        "distractor_facts",
        "distinct_words",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    required.extend(AnswerCategory::ALL.iter().map(|c| format!("answer_pct.{}", c.name())));
    required.extend(EgKind::ALL.iter().map(|e| format!("eg.{}", e.name())));
    let missing: Vec<&String> = required.iter().filter(|k| !keys.contains(k.as_str())).collect();
    let categories = keys.iter().filter(|k| k.starts_with("category.")).count();

    let shares: Vec<String> = pct.iter().map(|(c, p)| format!("{} {p:.1}%", c.name())).collect();
    check(
        kinds_ok && (3.0..=7.0).contains(&mean_distractors) && max_per_cell <= 10 && missing.is_empty() && categories > 0,
        format!(
            "{}; mean distractors {mean_distractors:.2}; max per (table, EG) {max_per_cell}; report fields missing {missing:?}",
            shares.join(", ")
        ),
    )
}

const DUMP_ROWS: usize = 100_000;
const RSS_CEILING_MB: f64 = 512.0;

fn child_max_rss_mb() -> f64 {
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    unsafe { libc::getrusage(libc::RUSAGE_CHILDREN, &mut usage) };
    usage.ru_maxrss as f64 / 1024.0
}

fn sha256_file(path: &std::path::Path) -> [u8; 32] {
    let mut file = File::open(path).unwrap();
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 20];
    loop {
        let n = file.read(&mut buf).unwrap();
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    hasher.finalize().into()
}

fn determinism_and_throughput() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("dump.jsonl");
    let (mut text, mut rows, mut ids) = (String::new(), 0, Vec::new());
    while rows < DUMP_ROWS {
        let t = synthetic_table(ids.len(), 31);
        rows += t.rows.len();
        ids.push(t.id.clone());
        text.push_str(&serde_json::to_string(&t).unwrap());
        text.push('\n');
    }
    fs::write(&input, text).unwrap();

    let mut runs = Vec::new();
    for name in ["a.jsonl", "b.jsonl"] {
        let output = dir.path().join(name);
        let start = Instant::now();
        let out = Command::new(env!("CARGO_BIN_EXE_synthqa"))
            .args(["generate", "--seed", "11", "--input"])
            .arg(&input)
            .arg("--output")
            .arg(&output)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("generate failed: {}", String::from_utf8_lossy(&out.stderr)));
        }
        runs.push((output, start.elapsed()));
    }
    let rss = child_max_rss_mb();
    let (ha, hb) = (sha256_file(&runs[0].0), sha256_file(&runs[1].0));

    // tables appear in input order, each in one contiguous block
    let position: std::collections::HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let (mut last, mut order_ok, mut examples) = (None::<usize>, true, 0usize);
    for line in BufReader::new(File::open(&runs[0].0).unwrap()).lines() {
        let rec: ExampleRecord = serde_json::from_str(&line.unwrap()).unwrap();
        let pos = position[rec.source.table_id.as_str()];
        order_ok &= last.map_or(true, |l| pos >= l);
        last = Some(pos);
        examples += 1;
    }

    let bytes = fs::metadata(&runs[0].0).map(|m| m.len()).unwrap_or(0);
    check(
        ha == hb && order_ok && rss < RSS_CEILING_MB && examples > 0,
        format!(
            "{rows} rows / {} tables -> {examples} examples ({:.0} MB); runs {:.1}s and {:.1}s; identical={}; order={}; peak RSS {rss:.0} MB (ceiling {RSS_CEILING_MB:.0} MB)",
            ids.len(),
            bytes as f64 / 1e6,
            runs[0].1.as_secs_f64(),
            runs[1].1.as_secs_f64(),
            ha == hb,
            ok_word(order_ok)
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let corpus = desk_corpus();
    let build = start.elapsed();

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("oracle equivalence", Box::new(|| oracle_equivalence(&corpus, build))),
        ("gold sufficiency / distractor irrelevance", Box::new(|| gold_sufficiency(&corpus))),
        ("Chelsea worked example", Box::new(worked_example)),
        ("sampler exactness", Box::new(sampler_exactness)),
        ("two-task strategy orderings", Box::new(fig3_reproduction)),
        ("plateau entropy", Box::new(entropy_behavior)),
        ("corpus shape", Box::new(|| corpus_shape(&corpus))),
        ("determinism and throughput", Box::new(determinism_and_throughput)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += usize::from(outcome.is_err());
        println!("criterion {} [{tag}] {name}: {detail}", i + 1);
    }
    if failed == 0 {
        println!("acceptance: all {} criteria pass", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria fail", criteria.len());
        ExitCode::FAILURE
    }
}
