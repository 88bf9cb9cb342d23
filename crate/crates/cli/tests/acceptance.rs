//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any failed. Pass criterion numbers as arguments to
//! run a subset, e.g. `cargo test --test acceptance -- 1 2 6`.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ndarray::Array2;
use qsrevent::geometry::{
    decompose_ypr, frobenius_distance, fs_frame, recompose, Point2, Point3, Rotation3, TimedPoint,
};
use qsrevent::labels::{LabelTuple, Preposition, Slot, Verb};
use qsrevent::learn::crf::tuples;
use qsrevent::learn::gradcheck::gradcheck;
use qsrevent::learn::{
    rng_for, Classifier, CrfMask, Example, GradcheckConfig, Hyperparameters, ModelKind, Rng64, TreeCrf,
};
use qsrevent::pipeline::{extract, prepare, resample, FeatureKind, PipelineConfig, SEGMENT_FRAMES};
use qsrevent::qsr::{argd_bin, cardir3d, qtc_c, CardinalDir3D, QsrParams, QtcC};
use qsrevent::sim::{generate, ScenarioSpec};
use rand::Rng;

const MASTER_SEED: u64 = 1;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

/// Runs `f`, failing the criterion if it exceeds `limit`.
fn timed(limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> (Verdict, Duration) {
    let start = Instant::now();
    let mut v = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            v.passed = false;
            v.detail.push_str(&format!(
                "; took {:.1} s, limit {:.0} s",
                took.as_secs_f64(),
                limit.as_secs_f64()
            ));
        }
    }
    (v, took)
}

// ---- 1: calculi and geometry properties ----

fn random_point3(rng: &mut Rng64, r: f64) -> Point3 {
    Point3::new(rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-r..r))
}

fn random_point2(rng: &mut Rng64, r: f64) -> Point2 {
    Point2::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

fn random_rotation(rng: &mut Rng64) -> Rotation3 {
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (w, x, y, z) = (
        a * (2.0 * PI * u2).sin(),
        a * (2.0 * PI * u2).cos(),
        b * (2.0 * PI * u3).sin(),
        b * (2.0 * PI * u3).cos(),
    );
    Rotation3 {
        m: [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ],
    }
}

fn criterion_1() -> Verdict {
    let mut rng = rng_for(MASTER_SEED, 101);
    let prm = QsrParams::default();
    let mut failures = Vec::new();

    let mut fs_worst = 0.0f64;
    let mut fs_checked = 0;
    while fs_checked < 1000 {
        let dt = rng.gen_range(0.01..0.5);
        let s = [0.0, dt, 2.0 * dt].map(|t| TimedPoint::new(t, random_point3(&mut rng, 2.0)));
        let f = fs_frame(&s).expect("increasing times");
        if !f.degenerate {
            fs_worst = fs_worst.max(f.orthonormality_residual());
            fs_checked += 1;
        }
    }
    if fs_worst > 1e-9 {
        failures.push(format!("FS residual {fs_worst:e}"));
    }

    let euler_worst = (0..1000)
        .map(|_| {
            let r = random_rotation(&mut rng);
            frobenius_distance(&recompose(&decompose_ypr(&r)), &r)
        })
        .fold(0.0, f64::max);
    if euler_worst > 1e-9 {
        failures.push(format!("Euler roundtrip {euler_worst:e}"));
    }

    let mut swap_bad = 0;
    let mut scale_bad = 0;
    for _ in 0..1000 {
        let (kp, lp) = loop {
            let (a, b) = (random_point2(&mut rng, 3.0), random_point2(&mut rng, 3.0));
            if a.distance(b) > 0.05 {
                break (a, b);
            }
        };
        let (kc, lc) = (kp + random_point2(&mut rng, 0.5), lp + random_point2(&mut rng, 0.5));
        let q = qtc_c(kp, kc, lp, lc, &prm).unwrap();
        let s = qtc_c(lp, lc, kp, kc, &prm).unwrap();
        if s != (QtcC {
            a: q.b,
            b: q.a,
            c: q.d.negate(),
            d: q.c.negate(),
        }) {
            swap_bad += 1;
        }
        let k = rng.gen_range(0.1..10.0);
        let shift = random_point2(&mut rng, 5.0);
        let m = |p: Point2| p * k + shift;
        if qtc_c(m(kp), m(kc), m(lp), m(lc), &prm).unwrap() != q {
            scale_bad += 1;
        }
    }
    if swap_bad > 0 || scale_bad > 0 {
        failures.push(format!("QTC swap violations {swap_bad}, scale violations {scale_bad}"));
    }

    let mut partition_bad = 0;
    for _ in 0..1000 {
        let refs: Vec<Point3> = (0..rng.gen_range(1..6)).map(|_| random_point3(&mut rng, 1.0)).collect();
        let target: Vec<Point3> = (0..rng.gen_range(1..4)).map(|_| random_point3(&mut rng, 2.0)).collect();
        let got = cardir3d(&refs, &target).unwrap();
        let c = Point3::centroid(&target).unwrap();
        let axis = |v: f64, f: fn(&Point3) -> f64| {
            let lo = refs.iter().map(f).fold(f64::INFINITY, f64::min);
            let hi = refs.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
            [v < lo, lo <= v && v <= hi, v > hi]
        };
        let (ns, ew, ab) = (axis(c.y, |p| p.y), axis(c.x, |p| p.x), axis(c.z, |p| p.z));
        let members: Vec<usize> = (0..CardinalDir3D::COUNT)
            .filter(|&i| ns[i / 9] && ew[i / 3 % 3] && ab[i % 3])
            .collect();
        if members != [got.index()] {
            partition_bad += 1;
        }
    }
    if partition_bad > 0 {
        failures.push(format!("cardir3d partition violations {partition_bad}"));
    }

    let mut argd_bad = 0;
    for _ in 0..1000 {
        let (a, b): (f64, f64) = (rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
        let (lo, hi) = (a.min(b), a.max(b));
        if argd_bin(lo, prm.argd_width, prm.argd_bins).unwrap().index
            > argd_bin(hi, prm.argd_width, prm.argd_bins).unwrap().index
        {
            argd_bad += 1;
        }
    }
    if argd_bad > 0 {
        failures.push(format!("argd monotonicity violations {argd_bad}"));
    }

    let detail = format!(
        "FS residual {fs_worst:.1e}, Euler {euler_worst:.1e}, 1000 QTC swap/scale, 1000 cardir3d, 1000 argd pairs"
    );
    if failures.is_empty() {
        verdict(true, detail)
    } else {
        verdict(false, failures.join("; "))
    }
}

// ---- 2: CRF exactness ----

fn criterion_2() -> Verdict {
    let mut rng = rng_for(MASTER_SEED, 102);
    let mut worst = 0.0f64;
    let mut argmax_bad = 0;
    let mut masked = 0;
    for i in 0..100 {
        let mut crf = TreeCrf::<f64>::for_labels();
        for t in crf.tables.iter_mut() {
            t.mapv_inplace(|_| rng.gen_range(-2.0..2.0));
        }
        if i % 5 == 0 {
            let mut mask = CrfMask::allow_all(crf.sizes);
            for t in mask.tables.iter_mut() {
                let dim = t.dim();
                *t = Array2::from_shape_fn(dim, |_| rng.gen_bool(0.75));
                t[[0, 0]] = true;
            }
            crf.mask = Some(mask);
            masked += 1;
        }
        let scores: Vec<f64> = (0..crf.score_len()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let all: Vec<([usize; 5], f64)> = tuples(crf.sizes)
            .map(|t| (t, crf.tuple_score(&scores, t).unwrap()))
            .collect();
        assert_eq!(all.len(), 1280);
        let m = all.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        let log_z = m + all.iter().map(|x| (x.1 - m).exp()).sum::<f64>().ln();
        worst = worst.max((crf.log_partition(&scores).unwrap() - log_z).abs());
        let best = all
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .unwrap();
        if crf.decode(&scores).unwrap().0 != best.0 {
            argmax_bad += 1;
        }
    }
    verdict(
        worst <= 1e-8 && argmax_bad == 0 && masked >= 20,
        format!("100 instances ({masked} masked): worst |log Z error| {worst:.1e}, argmax mismatches {argmax_bad}"),
    )
}

// ---- 3: gradient fidelity ----

fn random_examples(kind: FeatureKind, rows: usize, cols: usize, rng: &mut Rng64) -> Vec<Example> {
    (0..4)
        .map(|_| Example {
            session_id: "g".into(),
            kind,
            features: Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-1.0..1.0)),
            label: LabelTuple::from_indices(Slot::ALL.map(|s| rng.gen_range(0..s.size()))).unwrap(),
        })
        .collect()
}

fn criterion_3() -> Verdict {
    let mut rng = rng_for(MASTER_SEED, 103);
    let cases: [(&str, ModelKind, usize, Option<&str>); 4] = [
        ("MLP", ModelKind::Mlp, 2, None),
        ("LSTM-1", ModelKind::Lstm, 1, None),
        ("LSTM-2", ModelKind::Lstm, 2, None),
        ("CRF tables", ModelKind::Mlp, 1, Some("crf.")),
    ];
    let mut all_ok = true;
    let mut parts = Vec::new();
    for (name, model, layers, prefix) in cases {
        let (kind, rows, cols) = match model {
            ModelKind::Lstm => (FeatureKind::Qual2D, SEGMENT_FRAMES, 7),
            ModelKind::Mlp => (FeatureKind::EventQual2D, 1, 9),
        };
        let hp = Hyperparameters {
            layers,
            hidden: 8,
            projection: 5,
            ..Default::default()
        };
        let mut clf: Classifier = Classifier::new(model, kind, cols, &hp).unwrap();
        for t in clf.tensors_mut() {
            t.mapv_inplace(|_| rng.gen_range(-0.5..0.5));
        }
        let data = random_examples(kind, rows, cols, &mut rng);
        let cfg = GradcheckConfig {
            tensor_prefix: prefix.map(String::from),
            seed: rng.gen(),
            ..Default::default()
        };
        let r = gradcheck(&clf, &data, &cfg).unwrap();
        all_ok &= r.passed && r.sampled == 200;
        parts.push(format!(
            "{name} {}/{} (worst {:.1e})",
            r.within_tolerance, r.sampled, r.worst_rel_error
        ));
    }
    verdict(all_ok, parts.join(", "))
}

// ---- 6: pipeline exactness ----

fn criterion_6() -> Verdict {
    let cfg = PipelineConfig::default();
    let mut failures = Vec::new();
    let mut resample_worst = 0.0f64;
    let mut event_checked = 0;
    let mut groups_checked = 0;
    for (i, (verb, prep)) in [
        (Verb::Push, Preposition::Toward),
        (Verb::Roll, Preposition::Past),
        (Verb::Slide, Preposition::AwayFrom),
        (Verb::Pull, Preposition::None),
    ]
    .into_iter()
    .enumerate()
    {
        let mut spec = ScenarioSpec::new(verb, prep, 40 + i as u64);
        spec.takes = 2;
        spec.noise_sigma = 0.005;
        let session = generate(&spec).unwrap().session;
        let r = resample(&session, session.rate_hz).unwrap();
        if r.frames.len() != session.frames.len() {
            failures.push("resampling changed the frame count".to_string());
        }
        for (a, b) in r.frames.iter().zip(&session.frames) {
            resample_worst = resample_worst.max((a.t - b.t).abs());
            for (p, q) in a.points.iter().zip(&b.points) {
                resample_worst = resample_worst.max((*p - *q).norm());
            }
        }

        for seg in prepare(&session, cfg.rate_hz).unwrap() {
            for (event, frame) in [
                (FeatureKind::EventQual3D, FeatureKind::Qual3D),
                (FeatureKind::EventQual2D, FeatureKind::Qual2D),
            ] {
                let e = extract(event, &seg, &cfg).unwrap().values;
                let f = extract(frame, &seg, &cfg).unwrap();
                let d = f.cols();
                let (first, last) = (f.values.row(0), f.values.row(f.rows() - 1));
                let exact = e.nrows() == 1
                    && e.ncols() == 3 * d
                    && (0..d).all(|c| {
                        e[[0, c]] == first[c] && e[[0, d + c]] == last[c] && e[[0, 2 * d + c]] == last[c] - first[c]
                    });
                if !exact {
                    failures.push(format!("{event} row differs from first|last|diff"));
                }
                event_checked += 1;

                for row in f.values.rows() {
                    for g in f.onehot_groups() {
                        if row.slice(ndarray::s![g.clone()]).sum() != 1.0 {
                            failures.push(format!("{frame} one-hot group {g:?} does not sum to 1"));
                        }
                        groups_checked += 1;
                    }
                }
            }
        }
    }
    if resample_worst > 1e-12 {
        failures.push(format!("resampling identity error {resample_worst:e}"));
    }
    failures.dedup();
    if failures.is_empty() {
        verdict(
            true,
            format!(
                "resample identity error {resample_worst:.1e}, {event_checked} event rows exact, {groups_checked} one-hot groups sum to 1"
            ),
        )
    } else {
        verdict(false, failures.join("; "))
    }
}

// ---- 4, 5, 7: cross-validation on the synthetic corpus ----

struct Row {
    kind: String,
    mean: f64,
    per_slot: [f64; 5],
}

fn run_xval(dir: &Path) -> Result<(Vec<Row>, String, String, Duration), String> {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_qsrevent"))
        .args([
            "xval", "--kinds", "all", "--grid", "reduced", "--n", "30", "--folds", "5", "--quiet", "--seed",
        ])
        .arg(MASTER_SEED.to_string())
        .arg("--out")
        .arg(dir)
        .env_remove("QSREVENT_CONFIG")
        .output()
        .map_err(|e| e.to_string())?;
    let took = start.elapsed();
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let csv = fs::read_to_string(dir.join("report.csv")).map_err(|e| e.to_string())?;
    let per_slot = fs::read_to_string(dir.join("per_slot.csv")).map_err(|e| e.to_string())?;
    let header: Vec<&str> = csv.lines().next().unwrap_or("").split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or(format!("no column {name}"))
    };
    let slot_cols: Vec<usize> = Slot::ALL.iter().map(|s| col(s.name())).collect::<Result<_, _>>()?;
    let mean_col = col("mean")?;
    let rows = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Row {
                kind: f[0].to_string(),
                mean: f[mean_col].parse().unwrap(),
                per_slot: std::array::from_fn(|s| f[slot_cols[s]].parse().unwrap()),
            }
        })
        .collect();
    Ok((rows, csv, per_slot, took))
}

fn criteria_4_5_7() -> Vec<(u8, &'static str, Verdict, Duration)> {
    let tmp = tempfile::tempdir().expect("temp dir");
    let first = run_xval(&tmp.path().join("run1"));
    let second = run_xval(&tmp.path().join("run2"));
    let (rows, csv1, per_slot, took1) = match first {
        Ok(v) => v,
        Err(e) => {
            let fail = || verdict(false, format!("xval failed: {e}"));
            return vec![
                (4, "directional precision ordering", fail(), Duration::ZERO),
                (5, "per-slot sanity", fail(), Duration::ZERO),
                (7, "determinism", fail(), Duration::ZERO),
            ];
        }
    };
    let get = |k: &str| rows.iter().find(|r| r.kind == k).map(|r| r.mean).unwrap_or(f64::NAN);
    let pct = |v: f64| 100.0 * v;
    let (raw, q3, q2, n3, n2, e3, e2) = (
        get("3D-Raw"),
        get("3D-Qual"),
        get("2D-Qual"),
        get("3D-Quant"),
        get("2D-Quant"),
        get("3D-Event-Qual"),
        get("2D-Event-Qual"),
    );
    let best_frame = [raw, n3, q3, n2, q2].into_iter().fold(f64::NEG_INFINITY, f64::max);
    let a = q2 >= raw + 0.10;
    let b = q3 > n3 && q2 > n2;
    let c = e3 <= best_frame - 0.15 && e2 <= best_frame - 0.15;
    let table: Vec<String> = rows.iter().map(|r| format!("{} {:.1}%", r.kind, pct(r.mean))).collect();
    let runtime_note = if took1 <= Duration::from_secs(30 * 60) {
        format!("{:.1} min, within the 30 min target", took1.as_secs_f64() / 60.0)
    } else {
        format!(
            "{:.1} min on {} core(s), over the 30 min desktop target",
            took1.as_secs_f64() / 60.0,
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        )
    };
    let c4 = verdict(
        a && b && c,
        format!(
            "(a) 2D-Qual {:.1}% vs 3D-Raw {:.1}%: {}; (b) 3D-Qual {:.1}% vs 3D-Quant {:.1}%, 2D-Qual {:.1}% vs 2D-Quant {:.1}%: {}; \
             (c) events {:.1}%/{:.1}% vs best frame-level {:.1}%: {}; [{}]; runtime {}",
            pct(q2),
            pct(raw),
            ok(a),
            pct(q3),
            pct(n3),
            pct(q2),
            pct(n2),
            ok(b),
            pct(e3),
            pct(e2),
            pct(best_frame),
            ok(c),
            table.join(", "),
            runtime_note
        ),
    );

    let best = rows.iter().fold(None::<&Row>, |b, r| match b {
        Some(b) if b.mean >= r.mean => Some(b),
        _ => Some(r),
    });
    let c5 = match best {
        Some(best) => {
            let listed = Slot::ALL.iter().all(|s| per_slot.contains(&format!(",{},", s.name())));
            let dominated = best.per_slot.iter().all(|&p| p >= best.mean);
            let slots: Vec<String> = Slot::ALL
                .iter()
                .zip(best.per_slot)
                .map(|(s, p)| format!("{} {:.1}%", s.name(), pct(p)))
                .collect();
            verdict(
                listed && dominated,
                format!(
                    "best {} all-slot {:.1}%; {}",
                    best.kind,
                    pct(best.mean),
                    slots.join(", ")
                ),
            )
        }
        None => verdict(false, "empty report"),
    };

    let c7 = match second {
        Ok((_, csv2, _, _)) => verdict(
            csv1 == csv2,
            if csv1 == csv2 {
                "two seeded runs gave byte-identical precision tables".to_string()
            } else {
                "precision tables differ between runs".to_string()
            },
        ),
        Err(e) => verdict(false, format!("second xval failed: {e}")),
    };
    vec![
        (4, "directional precision ordering", c4, took1),
        (5, "per-slot sanity", c5, Duration::ZERO),
        (7, "determinism", c7, Duration::ZERO),
    ]
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

fn main() {
    let selected: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |n: u8| selected.is_empty() || selected.contains(&n);
    let mut results: Vec<(u8, &str, Verdict, Duration)> = Vec::new();

    let quick: [(u8, &str, Option<u64>, fn() -> Verdict); 4] = [
        (1, "calculi and geometry properties", Some(30), criterion_1),
        (2, "CRF exactness", Some(10), criterion_2),
        (3, "gradient fidelity", Some(300), criterion_3),
        (6, "pipeline exactness", None, criterion_6),
    ];
    for (n, name, limit, f) in quick {
        if wanted(n) {
            let (v, took) = timed(limit.map(Duration::from_secs), f);
            report(n, name, &v, took);
            results.push((n, name, v, took));
        }
    }
    if [4, 5, 7].iter().any(|&n| wanted(n)) {
        for (n, name, v, took) in criteria_4_5_7() {
            if wanted(n) {
                report(n, name, &v, took);
                results.push((n, name, v, took));
            }
        }
    }

    let failed: Vec<u8> = results.iter().filter(|r| !r.2.passed).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" (failed: {failed:?})")
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}

fn report(n: u8, name: &str, v: &Verdict, took: Duration) {
    println!(
        "[{}] criterion {n}: {name} ({:.1} s): {}",
        if v.passed { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        v.detail
    );
}
