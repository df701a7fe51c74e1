//! Acceptance suite: one pass/fail line per criterion, asserted at the end.
//!
//! Tolerances are pinned next to each criterion.  Exact claims are checked
//! with rational equality (no epsilon at all); floating-point claims state
//! their tolerance explicitly.

mod common;

use common::{
    eigenvalues, flow, g2_velocities, g3, laplace_quadrature, peripheral_count,
    subdominant_modulus, walk_coverage, DataGen,
};
use num_traits::{One, Signed, Zero};
use semiflow::{
    build_operators, conjugated_evaluate_tc, conjugated_period, defect_series, embed, evaluate_s,
    find_attractor, imprimitivity_index, is_irreducible, is_strongly_connected_vertices, q, qi,
    random_mixed, random_strongly_connected, resolvent, spectral_projection, subdivide,
    subdivided_period, to_f64, truncate, verify_attractor, GraphTemplate, PiecewiseLinear,
    RandomGraphConfig, SparseVec, StepFunction, TestFunction, Q, DEFAULT_PROJECTION_MAX_ITER,
    DEFAULT_PROJECTION_TOL,
};

/// Records and prints a single criterion verdict.
struct Verdicts {
    failures: Vec<String>,
}

impl Verdicts {
    fn new() -> Self {
        Self { failures: Vec::new() }
    }

    fn record(&mut self, number: usize, name: &str, pass: bool) {
        println!("criterion {number} — {name}: {}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures.push(format!("criterion {number} ({name})"));
        }
    }

    fn assert_all(self) {
        assert!(self.failures.is_empty(), "failed: {}", self.failures.join(", "));
    }
}

/// Criterion 1 — exact semigroup law `T(s)T(t)f = T(s+t)f` on 50 random
/// valid graphs (≤ 12 edges) with 20 random rational `(s, t)` pairs and
/// random step data each.  Tolerance: exact rational equality.
fn semigroup_law() -> bool {
    let cfg = RandomGraphConfig::default();
    let mut gen = dgen(1);
    for seed in 0..50u64 {
        let spec = random_mixed(seed, &cfg);
        let (_, op) = build_operators(&spec).expect("random graph is valid");
        for _ in 0..20 {
            let s = gen.time();
            let t = gen.time();
            let f = gen.edge_function(op.dim());
            let staged = flow(&op, &s, &flow(&op, &t, &f));
            let direct = flow(&op, &(&s + &t), &f);
            if staged != direct {
                return false;
            }
        }
    }
    true
}

/// Criterion 2 — exact mass conservation and contraction: `‖T(t)f‖₁ = ‖f‖₁`
/// for `f ≥ 0`, `≤` for signed `f`; `‖S(t)μ‖_TV = ‖μ‖_TV` for positive `μ`,
/// `≤` for signed `μ`.  Tolerance: exact rational comparison.
fn conservation_contraction() -> bool {
    let cfg = RandomGraphConfig::default();
    let mut gen = dgen(2);
    for seed in 0..25u64 {
        let spec = random_mixed(100 + seed, &cfg);
        let (_, op) = build_operators(&spec).expect("random graph is valid");
        for _ in 0..4 {
            let t = gen.time();

            let pos = gen.positive_edge_function(op.dim());
            if flow(&op, &t, &pos).l1_norm() != pos.l1_norm() {
                return false;
            }
            let signed = gen.edge_function(op.dim());
            if flow(&op, &t, &signed).l1_norm() > signed.l1_norm() {
                return false;
            }

            let mu_pos = gen.positive_measure(op.dim());
            let moved = evaluate_s(&op, &t, &mu_pos).expect("valid measure evaluation");
            if moved.variation() != mu_pos.variation() {
                return false;
            }
            let mu = gen.measure(op.dim());
            let moved = evaluate_s(&op, &t, &mu).expect("valid measure evaluation");
            if moved.variation() > mu.variation() {
                return false;
            }
        }
    }
    true
}

/// Criterion 3 — on ≥ 20 random strongly connected graphs (≤ 12 edges) the
/// period `k` from the cycle-length gcd, the dense-eigenvalue count of
/// peripheral eigenvalues (modulus > 1 − 10⁻⁶), and the minimal `m ≥ 1` with
/// `‖BᵐP − P‖₁ < 10⁻⁸` all agree.
fn period_triple_agreement() -> bool {
    let cfg = RandomGraphConfig::default();
    for seed in 0..24u64 {
        let spec = random_strongly_connected(200 + seed, &cfg);
        let (_, op) = build_operators(&spec).expect("random graph is valid");
        let k = imprimitivity_index(&op).expect("strongly connected");

        let eigs = eigenvalues(&op);
        if peripheral_count(&eigs) != k {
            return false;
        }

        let dec = spectral_projection(&op, DEFAULT_PROJECTION_TOL, DEFAULT_PROJECTION_MAX_ITER)
            .expect("projection converges");
        let bf = op.to_dense_f64();
        let mut power = dec.projection.clone();
        let mut minimal_m = None;
        for m in 1..=4 * op.dim() + 4 {
            power = &bf * power;
            if semiflow::one_norm(&(&power - &dec.projection)) < 1e-8 {
                minimal_m = Some(m);
                break;
            }
        }
        if minimal_m != Some(k) {
            return false;
        }
    }
    true
}

/// Criterion 4 — on aperiodic irreducible graphs the least-squares slope of
/// `log defect(t)` over `t ∈ {k, 2k, …, 50k}` is within ±0.05 of `log ρ`,
/// with `ρ` taken from the dense eigenvalue oracle.
fn defect_slope_fit() -> bool {
    let ladder = truncate(&GraphTemplate::Ladder, 3).expect("ladder template");
    for spec in [g3(), ladder] {
        let (_, op) = build_operators(&spec).expect("fixture is valid");
        let k = imprimitivity_index(&op).expect("strongly connected");
        let dec = spectral_projection(&op, DEFAULT_PROJECTION_TOL, DEFAULT_PROJECTION_MAX_ITER)
            .expect("projection converges");
        let grid: Vec<Q> = (1..=50).map(|m| qi((m * k) as i64)).collect();
        let defects = defect_series(&op, &dec.projection, &grid).expect("defect series");

        let points: Vec<(f64, f64)> = grid
            .iter()
            .zip(&defects)
            .filter(|(_, d)| **d > 1e-12)
            .map(|(t, d)| (to_f64(t), d.ln()))
            .collect();
        if points.len() < 10 {
            return false;
        }
        let n = points.len() as f64;
        let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (sxx, sxy) =
            points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x * x, b + x * y));
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

        let rho = subdominant_modulus(&eigenvalues(&op));
        if (slope - rho.ln()).abs() > 0.05 {
            return false;
        }
    }
    true
}

/// Criterion 5 — for `λ ∈ {1/2, 1, 2}` and 10 random step inputs the
/// resolvent series matches direct Laplace quadrature `∫₀^T e^{-λt} T(t)f dt`
/// (`T` chosen so `e^{-λT} < 10⁻⁸`) within sup-grid error 10⁻⁶, and the
/// constant Perron input reproduces `input/λ` within 10⁻⁸.
fn resolvent_against_quadrature() -> bool {
    let spec = g3();
    let (_, op) = build_operators(&spec).expect("fixture is valid");
    let grid: Vec<Q> = (0..=10).map(|i| q(i, 10)).collect();
    let mut gen = dgen(5);

    let inputs: Vec<_> = (0..10).map(|_| gen.edge_function(op.dim())).collect();
    for lambda in [0.5, 1.0, 2.0] {
        let t_max = (8.0 * std::f64::consts::LN_10 / lambda).ceil();
        for f in &inputs {
            let out = resolvent(&op, lambda, f, &grid, 1e-9).expect("series converges");
            for (i, s) in grid.iter().enumerate() {
                let oracle = laplace_quadrature(&op, lambda, f, s, t_max);
                for j in 0..op.dim() {
                    if (out.values[i][j] - oracle[j]).abs() > 1e-6 {
                        return false;
                    }
                }
            }
        }
    }

    // Perron input: π with Bπ = π exactly; R(λ)π must equal π/λ.
    let pi = [q(2, 5), q(1, 5), q(1, 5), q(1, 5)];
    let pi_vec = SparseVec::from_entries(pi.iter().cloned().enumerate());
    if op.apply(&pi_vec).expect("dimension matches") != pi_vec {
        return false;
    }
    let mut f_pi = semiflow::EdgeStepFunction::zero(op.dim());
    for (j, v) in pi.iter().enumerate() {
        f_pi.set_component(j, StepFunction::constant(v.clone())).expect("edge in range");
    }
    for lambda in [0.5, 1.0, 2.0] {
        let out = resolvent(&op, lambda, &f_pi, &grid, 1e-12).expect("series converges");
        for row in &out.values {
            for (j, v) in pi.iter().enumerate() {
                if (row[j] - to_f64(v) / lambda).abs() > 1e-8 {
                    return false;
                }
            }
        }
    }
    true
}

/// Criterion 6 — the embedding of profiles into measures commutes with the
/// flow: `embed(T(t)f) = S(t)embed(f)` exactly, on 50 random `(f, t)` pairs.
fn embedding_commutes() -> bool {
    let cfg = RandomGraphConfig::default();
    let mut gen = dgen(6);
    for seed in 0..50u64 {
        let spec = random_mixed(300 + seed, &cfg);
        let (_, op) = build_operators(&spec).expect("random graph is valid");
        let f = gen.edge_function(op.dim());
        let t = gen.time();
        let left = embed(&flow(&op, &t, &f)).expect("embedding total");
        let right =
            evaluate_s(&op, &t, &embed(&f).expect("embedding total")).expect("valid evaluation");
        if left != right {
            return false;
        }
    }
    true
}

/// Criterion 7 — atomic measures never move in variation norm but do move
/// weak*: with atoms spaced more than 1/10 apart, for every sampled
/// `t ∈ (0, 1/10]` the identity `‖S(t)μ − μ‖_TV = 2‖μ‖_TV` holds exactly
/// while `|⟨S(t)μ − μ, φ⟩| ≤ Lip(φ) · t · ‖μ‖_TV` for Lipschitz `φ`.
fn tv_jump_vs_weakstar() -> bool {
    let spec = g3();
    let (_, op) = build_operators(&spec).expect("fixture is valid");

    let mut mu = semiflow::EdgeMeasure::zero(op.dim());
    mu.set_component(
        0,
        semiflow::ComponentMeasure::new(
            vec![(q(1, 5), q(1, 3)), (q(2, 5), q(1, 2)), (q(4, 5), qi(1))],
            StepFunction::zero(),
        )
        .expect("positions in range"),
    )
    .expect("edge in range");
    mu.set_component(
        2,
        semiflow::ComponentMeasure::new(vec![(q(3, 5), q(2, 7))], StepFunction::zero())
            .expect("positions in range"),
    )
    .expect("edge in range");

    let mut phi = TestFunction::zero(op.dim());
    phi.set_component(
        0,
        PiecewiseLinear::new(vec![Q::zero(), q(1, 3), Q::one()], vec![Q::zero(), qi(1), Q::zero()])
            .expect("valid test function"),
    )
    .expect("edge in range");
    phi.set_component(
        2,
        PiecewiseLinear::new(vec![Q::zero(), q(3, 4), Q::one()], vec![qi(1), qi(-1), Q::zero()])
            .expect("valid test function"),
    )
    .expect("edge in range");

    let variation = mu.variation();
    let lip = phi.lipschitz();
    for t in [q(1, 100), q(1, 50), q(1, 20), q(1, 10)] {
        let moved = evaluate_s(&op, &t, &mu).expect("valid measure evaluation");
        let diff = moved.sub(&mu).expect("same dimension");
        if diff.variation() != qi(2) * &variation {
            return false;
        }
        let gap = (moved.pair(&phi).expect("pairing total")
            - mu.pair(&phi).expect("pairing total"))
        .abs();
        if gap > &lip * &t * &variation {
            return false;
        }
    }
    true
}

/// Criterion 8 — rational velocities via exact subdivision: on the 2-cycle
/// with velocities `(1, 1/2)` the conjugated flow at the lap time 3 is the
/// identity (exact), and the conjugated period is the subdivided cycle gcd 3
/// divided by `c = 1`.
fn velocity_conjugation() -> bool {
    let map = subdivide(&g2_velocities()).expect("velocities are rational");
    let mut gen = dgen(8);
    for _ in 0..10 {
        let f = gen.edge_function(2);
        let back = conjugated_evaluate_tc(&map, &qi(3), &f).expect("valid conjugated evaluation");
        if back != f {
            return false;
        }
    }
    subdivided_period(&map).expect("strongly connected") == 3
        && conjugated_period(&map).expect("strongly connected") == qi(3)
}

/// Criterion 9 — irreducibility via edge-level SCC agrees with vertex-level
/// strong connectivity on 100 random graphs, and every strongly connected
/// one yields an attractor certificate whose exact `δ` is re-verified by
/// exhaustive walk enumeration.
fn scc_and_attractors() -> bool {
    let cfg = RandomGraphConfig::default();
    for seed in 0..100u64 {
        let spec = random_mixed(400 + seed, &cfg);
        let (_, op) = build_operators(&spec).expect("random graph is valid");
        let strong = is_strongly_connected_vertices(&spec);
        if is_irreducible(&op) != strong {
            return false;
        }
        if !strong {
            continue;
        }
        let n = spec.vertex_count();
        let cert = match find_attractor(&spec, n, n) {
            Some(cert) => cert,
            None => return false,
        };
        if !verify_attractor(&spec, &cert) {
            return false;
        }
        let w: Vec<usize> = cert.w.iter().map(|v| v.0).collect();
        let coverages: Vec<Q> =
            (0..n).map(|v| walk_coverage(&spec, &w, v, cert.l)).collect();
        if coverages.iter().any(|c| !c.is_positive()) {
            return false;
        }
        if coverages.iter().min().expect("nonempty") != &cert.delta {
            return false;
        }
    }
    true
}

fn dgen(criterion: u64) -> DataGen {
    DataGen::new(0xACCE97 + criterion)
}

#[test]
fn acceptance() {
    let mut verdicts = Verdicts::new();
    verdicts.record(1, "exact semigroup law T(s)T(t) = T(s+t)", semigroup_law());
    verdicts.record(2, "exact mass conservation and contraction", conservation_contraction());
    verdicts.record(3, "period k: cycle gcd = eigencount = projection return", period_triple_agreement());
    verdicts.record(4, "defect decay slope within ±0.05 of log rho", defect_slope_fit());
    verdicts.record(5, "resolvent matches Laplace quadrature (1e-6) and Perron input (1e-8)", resolvent_against_quadrature());
    verdicts.record(6, "measure embedding commutes with the flow exactly", embedding_commutes());
    verdicts.record(7, "atomic TV jump is exact while weak* pairing is Lipschitz-small", tv_jump_vs_weakstar());
    verdicts.record(8, "velocity conjugation: identity at lap time, period 3/c", velocity_conjugation());
    verdicts.record(9, "SCC irreducibility agreement and exhaustively re-verified attractors", scc_and_attractors());
    verdicts.assert_all();
}
