//! Reference implementations shared by the integration tests and the
//! acceptance harness. Nothing here reuses the solver code under test.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gtl_core::data::{partition, synth_blobs, LocalDataset, PartitionSpec, Regime};
use gtl_core::learn::GreedyTlConfig;
use gtl_core::netsim::{formulas, reconcile, Bus, Encoding, Phase, Procedure};
use gtl_core::proto::{run_gtl, run_nohtl_mu, ProtocolConfig};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random columns in [-1, 1) and ±1 targets.
pub fn random_instance(rng: &mut ChaCha8Rng, m: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let cols = (0..p)
        .map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let y = (0..m)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    (cols, y)
}

/// Dense solve of `(AᵀA/m + λI) w = Aᵀy/m` by LU on the normal equations.
pub fn dense_ridge(columns: &[&Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
    let m = y.len();
    let p = columns.len();
    if p == 0 {
        return Vec::new();
    }
    let a = DMatrix::from_fn(m, p, |i, j| columns[j][i]);
    let yv = DVector::from_column_slice(y);
    let g = a.transpose() * &a / m as f64 + DMatrix::identity(p, p) * lambda;
    let b = a.transpose() * yv / m as f64;
    g.lu()
        .solve(&b)
        .expect("regularised Gram matrix is invertible")
        .as_slice()
        .to_vec()
}

/// `(1/m)‖y − Aw‖² + λ‖w‖²`, evaluated directly.
pub fn objective(columns: &[&Vec<f64>], y: &[f64], w: &[f64], lambda: f64) -> f64 {
    let m = y.len();
    let sse: f64 = (0..m)
        .map(|i| {
            let pred: f64 = columns.iter().zip(w).map(|(c, wj)| c[i] * wj).sum();
            (pred - y[i]).powi(2)
        })
        .sum();
    sse / m as f64 + lambda * w.iter().map(|v| v * v).sum::<f64>()
}

fn fit(columns: &[Vec<f64>], y: &[f64], lambda: f64, set: &[usize]) -> f64 {
    let cols: Vec<&Vec<f64>> = set.iter().map(|&j| &columns[j]).collect();
    let w = dense_ridge(&cols, y, lambda);
    objective(&cols, y, &w, lambda)
}

/// Greedy by definition: at every step refit from scratch with each
/// remaining column and keep the best (lowest index on exact ties).
/// Returns the chosen columns and the objective after each step, starting
/// with the forced columns alone.
pub fn greedy_reference(
    columns: &[Vec<f64>],
    y: &[f64],
    lambda: f64,
    kappa: usize,
    forced: &[usize],
) -> (Vec<usize>, Vec<f64>) {
    let mut set: Vec<usize> = forced.to_vec();
    let mut objectives = vec![fit(columns, y, lambda, &set)];
    let mut order = Vec::new();
    while order.len() < kappa {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..columns.len()).filter(|j| !set.contains(j)) {
            let mut trial = set.clone();
            trial.push(j);
            let obj = fit(columns, y, lambda, &trial);
            if best.is_none_or(|(_, b)| obj < b) {
                best = Some((j, obj));
            }
        }
        match best {
            Some((j, obj)) if obj < objectives.last().unwrap() - 1e-12 => {
                set.push(j);
                order.push(j);
                objectives.push(obj);
            }
            _ => break,
        }
    }
    (order, objectives)
}

/// Best subset of `size` free columns (plus `forced`) by enumeration.
pub fn best_subset(
    columns: &[Vec<f64>],
    y: &[f64],
    lambda: f64,
    size: usize,
    forced: &[usize],
) -> (Vec<usize>, f64) {
    let free: Vec<usize> = (0..columns.len()).filter(|j| !forced.contains(j)).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut combo: Vec<usize> = (0..size).collect();
    loop {
        let subset: Vec<usize> = combo.iter().map(|&i| free[i]).collect();
        let mut set = forced.to_vec();
        set.extend(&subset);
        let obj = fit(columns, y, lambda, &set);
        if best.as_ref().is_none_or(|(_, b)| obj < *b) {
            best = Some((subset, obj));
        }
        // next combination in lexicographic order
        let Some(i) = (0..size).rev().find(|&i| combo[i] < free.len() - size + i) else {
            break;
        };
        combo[i] += 1;
        for j in i + 1..size {
            combo[j] = combo[j - 1] + 1;
        }
    }
    best.expect("at least one subset")
}

/// `s` locations holding `per_node` samples of each of `k` Gaussian
/// classes in `d` dimensions.
pub fn synthetic_nodes(
    s: usize,
    k: usize,
    d: usize,
    per_node: usize,
    seed: u64,
) -> Vec<LocalDataset> {
    let pool = synth_blobs(k, d, per_node * s, 3.0, seed).unwrap();
    let spec = PartitionSpec {
        regime: Regime::Balanced,
        num_locations: s,
        seed,
        ..Default::default()
    };
    partition(&pool, &spec).unwrap()
}

/// The bundled MNIST subset, relative to this crate.
pub fn mnist_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-5k")
}

/// Small GreedyTL budget so that dense runs stay cheap.
pub fn tiny_protocol() -> ProtocolConfig {
    ProtocolConfig {
        greedy: GreedyTlConfig {
            kappa: 2,
            bag_size: 4,
            bag_count: Some(1),
            ..Default::default()
        },
        seed: 5,
        ..Default::default()
    }
}

/// Meters one GTL and one noHTL_μ run with dense base models and compares
/// the coefficient counts with the closed forms, with zero tolerance.
/// Returns the number of sample payloads seen on the bus.
pub fn overhead_point(s: usize, k: usize, d0: usize, seed: u64) -> Result<usize, String> {
    let nodes = synthetic_nodes(s, k, d0 - 1, 2, seed);
    let cfg = tiny_protocol();
    let bus = Bus::new(s, Encoding::default());
    let gtl = run_gtl(&nodes, k, &cfg, None, &bus).map_err(|e| e.to_string())?;
    let step1 = gtl.ledger.phase(Phase::Step1);
    if step1.count != (s * (s - 1) * d0 * k) as u64
        || step1.count as f64 != formulas::all_to_all(s, k, d0 as f64)
    {
        return Err(format!(
            "GTL step 1 at s={s} k={k} d0={d0}: metered {}",
            step1.count
        ));
    }
    let rec = reconcile(&gtl.ledger, Procedure::Gtl { s, k });
    if !rec.exact() {
        return Err(format!(
            "GTL reconciliation at s={s} k={k} d0={d0}: {:?}",
            rec.rows
        ));
    }
    let bus = Bus::new(s, Encoding::default());
    let mu = run_nohtl_mu(&nodes, k, &cfg, None, &bus).map_err(|e| e.to_string())?;
    let total = mu.ledger.total();
    if total.count != (2 * k * (s - 1) * d0) as u64
        || total.count as f64 != formulas::predict_overhead_nohtl(s, k, d0 as f64).mu
        || total.bytes != total.count * 8
    {
        return Err(format!(
            "noHTL at s={s} k={k} d0={d0}: metered {} coefficients, {} bytes",
            total.count, total.bytes
        ));
    }
    Ok(gtl.ledger.sample_messages() + mu.ledger.sample_messages())
}

/// The randomized exactness grid: four corners plus sixteen random points.
pub fn overhead_grid() -> Vec<(usize, usize, usize)> {
    let mut r = rng(31);
    let mut points = vec![(2, 2, 5), (15, 12, 600), (15, 2, 5), (2, 12, 600)];
    points.extend((0..16).map(|_| {
        (
            r.random_range(2..=15),
            r.random_range(2..=12),
            r.random_range(5..=600),
        )
    }));
    points
}
