//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use fourier_lab::constants::{
    khinchin_ratio_exact, rademacher_ratio, random_vectors, scaling_sweep, standard_vectors,
    torus_adaptive, torus_partial_sum_ratio, Experiment, Member, SweepOptions,
};
use fourier_lab::experiments::{run_sweep, SweepConfig};
use fourier_lab::tower::{
    block_approximation, ralpha_conjugation, transfer_inequality_check, DualIsomorphism,
    OrthonormalSystem, SystemOrdering, Tower,
};
use fourier_lab::transform::TensorEmbedding;
use fourier_lab::{dft, idft, reflect, FiniteAbelianGroup, NormSpec, VectorFunction, XVector};

type Outcome = Result<String, String>;

/// Relative floor below which a difference is floating-point rounding.
const ROUNDING: f64 = 1e-12;

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_function(group: &FiniteAbelianGroup, dim: usize, rng: &mut ChaCha8Rng) -> VectorFunction {
    let values = (0..group.cardinality() * dim)
        .map(|_| gaussian(rng))
        .collect();
    VectorFunction::from_flat(group, dim, values).unwrap()
}

fn random_vector(dim: usize, rng: &mut ChaCha8Rng) -> XVector {
    XVector((0..dim).map(|_| gaussian(rng)).collect())
}

fn group(orders: &[usize]) -> FiniteAbelianGroup {
    FiniteAbelianGroup::new(orders.to_vec()).unwrap()
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

/// Identity and a random positive definite Gram matrix.
fn hilbert_norms(dim: usize, rng: &mut ChaCha8Rng) -> Vec<NormSpec> {
    let a = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let gram = &a * a.adjoint() + DMatrix::identity(dim, dim);
    vec![
        NormSpec::hilbert_identity(dim).unwrap(),
        NormSpec::hilbert(gram).unwrap(),
    ]
}

fn parseval() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let groups = [
        group(&[2]),
        group(&[3, 4]),
        group(&[16, 16]),
        group(&[1024]),
    ];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for dim in [1, 4, 8] {
        for spec in hilbert_norms(dim, &mut rng) {
            for g in &groups {
                for _ in 0..100 {
                    let f = random_function(g, dim, &mut rng);
                    let ratio = dft(&f).l2_norm(&spec).unwrap() / f.l2_norm(&spec).unwrap();
                    worst = worst.max((ratio - 1.0).abs());
                    count += 1;
                }
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max |ratio - 1| = {worst:.3e}"))?;
    Ok(format!("{count} functions, max |ratio - 1| = {worst:.1e}"))
}

const OPNORM_SWEEP: &str = r#"
experiment = "opnorm"
seed = 2024

[budget]
iterations = 150
restarts = 8

[family]
groups = ["Z2", "Z6", "Z4xZ4", "Z2xZ2xZ2xZ2xZ2", "Z64", "Z1024"]
norms = ["lp:1:d=2", "lp:1.5:d=2", "linf:d=2", "lp:1:d=8", "lp:1.5:d=8", "linf:d=8"]
"#;

fn opnorm_csv() -> Result<(String, Vec<(usize, f64)>), String> {
    let config = SweepConfig::parse(OPNORM_SWEEP).map_err(|e| e.to_string())?;
    let report = run_sweep(&config).map_err(|e| e.to_string())?;
    let rows = report
        .rows
        .iter()
        .map(|r| {
            let g: FiniteAbelianGroup = r.group.as_deref().unwrap().parse().unwrap();
            (g.cardinality(), r.estimate.lower)
        })
        .collect();
    Ok((report.to_csv().map_err(|e| e.to_string())?, rows))
}

fn finite_group_bound() -> Outcome {
    let (_, rows) = opnorm_csv()?;
    let mut tightest = f64::INFINITY;
    for &(n, lower) in &rows {
        let bound = (n as f64).sqrt();
        ensure(lower <= bound + 1e-9, || {
            format!("|G| = {n}: lower {lower} exceeds sqrt|G| = {bound}")
        })?;
        tightest = tightest.min(bound - lower);
    }
    Ok(format!(
        "{} estimates, smallest gap to sqrt|G| = {tightest:.1e}",
        rows.len()
    ))
}

fn inversion_reflection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for g in [group(&[6]), group(&[4, 9]), group(&[1024])] {
        for _ in 0..100 {
            let f = random_function(&g, 2, &mut rng);
            let scale = f.max_abs();
            let hat = dft(&f);
            worst = worst.max(idft(&hat).max_abs_diff(&f).unwrap() / scale);
            worst = worst.max(dft(&hat).max_abs_diff(&reflect(&f)).unwrap() / scale);
        }
    }
    ensure(worst <= 1e-10, || format!("max relative error {worst:.3e}"))?;
    Ok(format!("300 functions, max relative error {worst:.1e}"))
}

fn khinchin_constants() -> Outcome {
    let basis = standard_vectors(2, 2);
    let l1 = khinchin_ratio_exact(&NormSpec::lp(1.0, 2).unwrap(), &basis)
        .unwrap()
        .0;
    ensure(l1 == 2.0, || format!("lp(1) gives {l1}"))?;
    let linf = khinchin_ratio_exact(&NormSpec::linf(2).unwrap(), &basis)
        .unwrap()
        .0;
    ensure(linf == 0.5, || format!("lp(inf) gives {linf}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for n in 1..=10 {
        let spec = NormSpec::hilbert_identity(n).unwrap();
        let exact = khinchin_ratio_exact(&spec, &standard_vectors(n, n))
            .unwrap()
            .0;
        ensure(exact == 1.0, || format!("standard basis, n = {n}: {exact}"))?;
        let a = DMatrix::from_fn(n, n, |_, _| gaussian(&mut rng));
        let q = a.qr().q();
        let xs: Vec<XVector> = (0..n)
            .map(|j| XVector(q.column(j).iter().copied().collect()))
            .collect();
        let r = khinchin_ratio_exact(&spec, &xs).unwrap().0;
        worst = worst.max((r - 1.0).abs());
    }
    ensure(worst <= 1e-12, || {
        format!("orthonormal family off by {worst:.3e}")
    })?;
    Ok(format!(
        "lp(1) = 2, lp(inf) = 1/2, orthonormal n <= 10 within {worst:.1e}"
    ))
}

fn separation() -> Outcome {
    let options = SweepOptions::default();
    let members = |norm: &str| -> Vec<Member> {
        (1..=4)
            .map(|m| {
                let spec: NormSpec = format!("{norm}:d={}", 1 << m).parse().unwrap();
                Member::new(Some(group(&vec![2; m])), spec)
            })
            .collect()
    };
    let linf = scaling_sweep(Experiment::CharacterSystem, &members("linf"), &options)
        .map_err(|e| e.to_string())?;
    let values: Vec<f64> = linf.iter().map(|e| e.lower).collect();
    ensure(values.windows(2).all(|w| w[1] > w[0]), || {
        format!("linf ratios not increasing: {values:?}")
    })?;
    let l2 = scaling_sweep(Experiment::CharacterSystem, &members("lp:2"), &options)
        .map_err(|e| e.to_string())?;
    let drift = l2.iter().map(|e| (e.lower - 1.0).abs()).fold(0.0, f64::max);
    ensure(drift <= 1e-9, || format!("lp(2) drifts {drift:.3e} from 1"))?;
    Ok(format!(
        "linf ratios {values:?}, lp(2) within {drift:.1e} of 1"
    ))
}

fn torus() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut hilbert_worst: f64 = 0.0;
    for n in 1..=32 {
        let spec = hilbert_norms(3, &mut rng).pop().unwrap();
        let xs: Vec<XVector> = (0..2 * n + 1).map(|_| random_vector(3, &mut rng)).collect();
        let r = torus_partial_sum_ratio(&spec, &xs, 4 * n + 4).unwrap();
        hilbert_worst = hilbert_worst.max((r - 1.0).abs());
    }
    ensure(hilbert_worst <= 1e-10, || {
        format!("hilbert quadrature off by {hilbert_worst:.3e}")
    })?;

    // M is the size the adaptive rule settles on.
    let l1 = NormSpec::lp(1.0, 3).unwrap();
    let mut worst: f64 = 0.0;
    let mut floor_worst: f64 = 0.0;
    for n in [1, 2, 4, 8, 16, 32] {
        let xs: Vec<XVector> = (0..2 * n + 1).map(|_| random_vector(3, &mut rng)).collect();
        let m = torus_adaptive(&l1, &xs, 1e-6).unwrap().points;
        let at = |points| torus_partial_sum_ratio(&l1, &xs, points).unwrap();
        worst = worst.max((at(m) - at(2 * m)).abs());
        floor_worst = floor_worst.max((at(4 * n + 4) - at(8 * n + 8)).abs());
    }
    ensure(worst <= 1e-4, || {
        format!("lp(1) M vs 2M differ by {worst:.3e}")
    })?;
    Ok(format!(
        "hilbert within {hilbert_worst:.1e}; lp(1) M vs 2M within {worst:.1e} \
         (at M = 4n+4: {floor_worst:.1e})"
    ))
}

fn rademacher_system() -> Outcome {
    let tower = Tower::new(2, 12).unwrap();
    let rs: Vec<Vec<Complex64>> = (1..=12)
        .map(|i| {
            tower
                .rademacher(i)
                .unwrap()
                .into_iter()
                .map(|x| Complex64::new(x, 0.0))
                .collect()
        })
        .collect();
    let defect = OrthonormalSystem::gram_defect(&rs);
    ensure(defect <= 1e-12, || format!("Gram defect {defect:.3e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for spec in ["lp:1:d=3", "lp:1.5:d=3", "linf:d=3", "lp:2:d=3"] {
        let spec: NormSpec = spec.parse().unwrap();
        for n in 1..=10u32 {
            let xs: Vec<XVector> = (0..n).map(|_| random_vector(3, &mut rng)).collect();
            let targets: Vec<u32> = (1..=n).collect();
            let exact = khinchin_ratio_exact(&spec, &xs).unwrap().0;
            let on_tower = rademacher_ratio(&tower, &spec, &targets, &xs).unwrap();
            worst = worst.max((exact - on_tower).abs() / exact);
        }
    }
    ensure(worst <= 1e-12, || {
        format!("tower vs enumeration {worst:.3e}")
    })?;
    Ok(format!(
        "Gram defect {defect:.1e}, tower vs enumeration {worst:.1e}"
    ))
}

fn transfer() -> Outcome {
    let tower = Tower::new(2, 10).unwrap();
    let walsh = OrthonormalSystem::walsh(&tower).unwrap();
    let dyadic = OrthonormalSystem::ordered(&tower, SystemOrdering::Dyadic).unwrap();
    let targets = [1, 2, 3, 4];
    let exact = block_approximation(&tower, &walsh, &targets, 0.0).map_err(|e| e.to_string())?;
    ensure(exact.errors.iter().all(|&e| e == 0.0), || {
        format!("Walsh errors {:?}", exact.errors)
    })?;
    let approx = block_approximation(&tower, &dyadic, &targets, 0.01).map_err(|e| e.to_string())?;
    for (j, (&err, &thr)) in approx.errors.iter().zip(&approx.thresholds).enumerate() {
        let bound = 0.01 / 2f64.powi(j as i32 + 1);
        ensure(err < bound && thr == bound, || {
            format!("block {}: error {err:.3e} vs {bound:.3e}", j + 1)
        })?;
    }

    let mut min_slack = f64::INFINITY;
    let mut min_margin = f64::INFINITY;
    for (k, spec) in ["lp:1:d=4", "linf:d=4", "lp:3:d=4", "hilbert:d=4"]
        .iter()
        .enumerate()
    {
        let spec: NormSpec = spec.parse().unwrap();
        for set in 0..25 {
            let xs = random_vectors(4, 4, (k * 100 + set) as u64);
            let walsh_report = transfer_inequality_check(&tower, &spec, &xs, &exact, None)
                .map_err(|e| e.to_string())?;
            // Hilbert norms make the bound an identity, so the slack is
            // zero up to rounding in the sums.
            let relative = walsh_report.slack / (walsh_report.s * walsh_report.s);
            ensure(relative >= -ROUNDING, || {
                format!("Walsh slack {} on {spec}", walsh_report.slack)
            })?;
            min_slack = min_slack.min(relative);

            let report = transfer_inequality_check(&tower, &spec, &xs, &approx, None)
                .map_err(|e| e.to_string())?;
            let ratio = rademacher_ratio(&tower, &spec, &targets, &xs).unwrap();
            let bound = (report.eps.sqrt() + report.c.sqrt()).powi(2);
            ensure(report.holds && ratio <= bound, || {
                format!("{spec}, set {set}: ratio {ratio} vs bound {bound}, {report:?}")
            })?;
            min_margin = min_margin.min(bound - ratio);
        }
    }
    Ok(format!(
        "Walsh exact, min relative slack {min_slack:.1e}; dyadic errors {:.1e}, 100 sets, min margin {min_margin:.2}",
        approx.errors.iter().cloned().fold(0.0, f64::max)
    ))
}

fn ralpha() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let spec = NormSpec::lp(1.5, 3).unwrap();
    let mut conj: f64 = 0.0;
    let mut iso: f64 = 0.0;
    let groups = [&[2][..], &[3], &[4], &[6], &[8], &[2, 4]];
    for orders in groups {
        let g = group(orders);
        let alpha = DualIsomorphism::identity(&g);
        for _ in 0..20 {
            let psi = random_function(&g, 3, &mut rng);
            let report = ralpha_conjugation(&alpha, &psi, &spec).map_err(|e| e.to_string())?;
            conj = conj.max(report.conjugation_residual);
            iso = iso.max(report.isometry_residual);
        }
    }
    ensure(conj <= 1e-10 && iso <= 1e-10, || {
        format!("conjugation {conj:.3e}, isometry {iso:.3e}")
    })?;
    Ok(format!(
        "120 inputs, conjugation {conj:.1e}, isometry {iso:.1e}"
    ))
}

fn tensor_embedding() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (g, h) = (group(&[3]), group(&[4]));
    let spec = NormSpec::lp(1.0, 2).unwrap();
    let mut iso: f64 = 0.0;
    let mut commute: f64 = 0.0;
    for _ in 0..50 {
        let mut psi = random_function(&h, 1, &mut rng);
        let norm = psi
            .l2_norm(&NormSpec::hilbert_identity(1).unwrap())
            .unwrap();
        psi.scale(norm.recip());
        let j = TensorEmbedding::new(psi).map_err(|e| e.to_string())?;
        let f = random_function(&g, 2, &mut rng);
        let jf = j.embed(&f).unwrap();
        let nf = f.l2_norm(&spec).unwrap();
        iso = iso.max((jf.l2_norm(&spec).unwrap() - nf).abs() / nf);
        let lhs = dft(&jf);
        let rhs = j.embed_dual(&dft(&f)).unwrap();
        commute = commute.max(lhs.max_abs_diff(&rhs).unwrap() / rhs.max_abs());
    }
    ensure(iso <= 1e-10 && commute <= 1e-10, || {
        format!("isometry {iso:.3e}, diagram {commute:.3e}")
    })?;
    Ok(format!(
        "50 inputs, isometry {iso:.1e}, diagram {commute:.1e}"
    ))
}

fn reproducibility() -> Outcome {
    let (first, _) = opnorm_csv()?;
    let (second, _) = opnorm_csv()?;
    ensure(first == second, || "CSV differs between runs".into())?;
    Ok(format!("{} bytes identical", first.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, u64); 11] = [
        ("parseval", parseval, 10),
        ("finite-group bound", finite_group_bound, 60),
        ("inversion and reflection", inversion_reflection, 10),
        ("khinchin exact constants", khinchin_constants, 1),
        ("hilbert separation", separation, 30),
        ("torus functional", torus, 5),
        ("rademacher system", rademacher_system, 10),
        ("transfer", transfer, 30),
        ("r-alpha conjugation", ralpha, 5),
        ("tensor embedding", tensor_embedding, 5),
        ("reproducibility", reproducibility, 120),
    ];
    let mut failures = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed > Duration::from_secs(*limit) {
                Err(format!("{detail}; exceeded {limit} s"))
            } else {
                Ok(detail)
            }
        });
        let secs = elapsed.as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.2} s)", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.2} s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
