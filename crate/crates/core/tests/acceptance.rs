//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Expected values come from small
//! independent reference computations in this file, not from the library.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pqci_core::adversary::{run_attack_trials, AttackStrategy, Target};
use pqci_core::geometry::{Circle, ProblemParams};
use pqci_core::harness::cost_table;
use pqci_core::oracle::{InputRegisters, OracleAncillas, OracleOperator};
use pqci_core::protocol::{run_protocol, ProtocolOutcome};
use pqci_core::qarith::{Arith, ArithOp, ModWidth};
use pqci_core::sim::{BasisState, DenseState, Gate, Permutation, Register, SparseState};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Brute-force intersection test on plain integers.
fn reference_intersects(a: &Circle, b: &Circle) -> bool {
    let dx = a.x as i64 - b.x as i64;
    let dy = a.y as i64 - b.y as i64;
    let rs = a.r as i64 + b.r as i64;
    dx * dx + dy * dy < rs * rs
}

fn all_circles(t: u32) -> Vec<Circle> {
    let hi = (1u64 << t) - 1;
    let mut v = Vec::new();
    for x in 1..=hi {
        for y in 1..=hi {
            for r in 1..=hi {
                v.push(Circle::new(x, y, r));
            }
        }
    }
    v
}

struct SweepOutcome {
    pairs: usize,
    mismatches: usize,
    max_terms: usize,
    seconds: f64,
}

fn honest_sweep_t2() -> SweepOutcome {
    let p = ProblemParams::new(2).unwrap();
    let circles = all_circles(2);
    let start = Instant::now();
    let mut out = SweepOutcome {
        pairs: 0,
        mismatches: 0,
        max_terms: 0,
        seconds: 0.0,
    };
    for (i, a) in circles.iter().enumerate() {
        for (j, b) in circles.iter().enumerate() {
            let (tr, outcome) = run_protocol(a, b, &p, (i * 27 + j) as u64, None).unwrap();
            let want = if reference_intersects(a, b) {
                ProtocolOutcome::Intersect
            } else {
                ProtocolOutcome::Disjoint
            };
            out.pairs += 1;
            out.mismatches += (outcome != want) as usize;
            out.max_terms = out.max_terms.max(tr.max_terms);
        }
    }
    out.seconds = start.elapsed().as_secs_f64();
    out
}

fn criterion_1(s: &SweepOutcome) -> Verdict {
    verdict(
        s.pairs == 729 && s.mismatches == 0 && s.seconds < 60.0,
        format!(
            "{} pairs, {} mismatches, {:.2} s",
            s.pairs, s.mismatches, s.seconds
        ),
    )
}

fn criterion_2() -> Verdict {
    let p = ProblemParams::new(2).unwrap();
    let n = p.n();
    let inp = InputRegisters::within(Register::new(0, 3 * n), n).unwrap();
    let circles = all_circles(2);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut phase_errors = 0;
    let mut restore_errors = 0;
    let mut worst_fidelity: f64 = 1.0;
    let amp = Complex64::new(1.0 / (circles.len() as f64).sqrt(), 0.0);

    for _ in 0..20 {
        let bob = Circle::new(rng.gen_range(1..4), rng.gen_range(1..4), rng.gen_range(1..4));
        let u = OracleOperator::build(&bob, p).unwrap();
        let mut arith = Arith::new(n).unwrap();

        let label = |c: &Circle| {
            let mut k = BasisState::zero(3 * n);
            k.set(inp.x, c.x as u128);
            k.set(inp.y, c.y as u128);
            k.set(inp.r, c.r as u128);
            k
        };
        // each valid X on its own, with the work registers checked explicitly
        for c in &circles {
            let mut s = SparseState::basis(3 * n, label(c));
            let anc = OracleAncillas::attach(&mut s, n).unwrap();
            u.apply_with_ancillas(&mut s, &inp, &anc, &mut arith).unwrap();
            if !anc.restored(&s) {
                restore_errors += 1;
            }
            anc.detach(&mut s).unwrap();
            let a = s.amplitude(&label(c));
            let want = if reference_intersects(c, &bob) { -1.0 } else { 1.0 };
            if (a.re - want).abs() > 1e-12 || a.im.abs() > 1e-12 || s.len() != 1 {
                phase_errors += 1;
            }
        }
        // uniform superposition: U² = I
        let input = SparseState::from_terms(3 * n, circles.iter().map(|c| (label(c), amp))).unwrap();
        let mut s = input.clone();
        u.apply(&mut s, &inp, &mut arith).unwrap();
        u.apply(&mut s, &inp, &mut arith).unwrap();
        worst_fidelity = worst_fidelity.min(s.fidelity(&input).unwrap());
    }
    verdict(
        phase_errors == 0 && restore_errors == 0 && worst_fidelity >= 1.0 - 1e-10,
        format!(
            "20 Bob circles x 27 inputs: {phase_errors} phase errors, {restore_errors} dirty ancillas, min U² fidelity {worst_fidelity:.12}"
        ),
    )
}

/// Applies `op` to a basis state and reads the registers back.
fn run_op(n: usize, width: usize, op: &ArithOp, regs: &[Register], vals: &[u64]) -> Vec<u64> {
    let mut k = BasisState::zero(width);
    for (r, v) in regs.iter().zip(vals) {
        k.set(*r, *v as u128);
    }
    let mut s = SparseState::basis(width, k);
    Arith::new(n).unwrap().apply(&mut s, op).unwrap();
    let (key, _) = s.iter().next().unwrap();
    regs.iter().map(|r| key.get(*r) as u64).collect()
}

/// An op, the registers it touches, their inputs and the expected outputs.
type Case = (ArithOp, Vec<Register>, Vec<u64>, Vec<u64>);

fn arithmetic_cases(n: usize, inputs: &mut dyn FnMut() -> Option<[u64; 3]>) -> usize {
    let m = (1u64 << n) - 1;
    let (a, b, c) = (Register::new(0, n), Register::new(n, n), Register::new(2 * n, n));
    let w = 3 * n;
    let mut errors = 0;
    while let Some([x, y, z]) = inputs() {
        let k = x;
        let checks: Vec<Case> = vec![
            (ArithOp::AddConst { reg: a, c: k as u128 }, vec![a, b], vec![y, 0], vec![(y + k) & m, 0]),
            (ArithOp::AddReg { src: a, dst: b, subtract: false }, vec![a, b], vec![x, y], vec![x, (x + y) & m]),
            (ArithOp::AddReg { src: a, dst: b, subtract: true }, vec![a, b], vec![x, y], vec![x, y.wrapping_sub(x) & m]),
            (ArithOp::Negate { reg: a }, vec![a], vec![y], vec![y.wrapping_neg() & m]),
            (ArithOp::MulConstAccum { y: a, acc: b, k: k as u128 }, vec![a, b], vec![y, z], vec![y, (z + k.wrapping_mul(y)) & m]),
            (
                ArithOp::MulRegAccum { x: a, y: b, acc: c, subtract: false },
                vec![a, b, c],
                vec![x, y, z],
                vec![x, y, (z + x.wrapping_mul(y)) & m],
            ),
            (
                ArithOp::MulRegAccum { x: a, y: b, acc: c, subtract: true },
                vec![a, b, c],
                vec![x, y, z],
                vec![x, y, z.wrapping_sub(x.wrapping_mul(y)) & m],
            ),
        ];
        for (op, regs, input, want) in checks {
            if run_op(n, w, &op, &regs, &input) != want {
                errors += 1;
            }
        }
    }
    errors
}

fn bijective(n: usize, op: &ArithOp, arity: usize) -> bool {
    let nw = ModWidth::new(n).unwrap();
    let total = 1usize << (arity * n);
    let mut seen = vec![false; total];
    let m = (1u128 << n) - 1;
    for i in 0..total {
        let mut v: Vec<u128> = (0..arity).map(|j| (i as u128 >> (j * n)) & m).collect();
        op.map_values(nw, &mut v);
        let j = v.iter().enumerate().fold(0usize, |acc, (p, x)| acc | ((*x as usize) << (p * n)));
        if std::mem::replace(&mut seen[j], true) {
            return false;
        }
    }
    true
}

fn criterion_3() -> Verdict {
    // n = 4, every (x, y, z)
    let mut i = 0u64;
    let exhaustive = arithmetic_cases(4, &mut || {
        if i >= 1 << 12 {
            return None;
        }
        let v = [i & 15, (i >> 4) & 15, i >> 8];
        i += 1;
        Some(v)
    });
    // n = 16, 10⁴ random cases
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut left = 10_000;
    let random = arithmetic_cases(16, &mut || {
        if left == 0 {
            return None;
        }
        left -= 1;
        Some([rng.gen::<u16>() as u64, rng.gen::<u16>() as u64, rng.gen::<u16>() as u64])
    });
    // bijectivity, n = 2..=6
    let mut non_bijective = 0;
    for n in 2..=6 {
        let r = |i| Register::new(i * n, n);
        let ops: Vec<(ArithOp, usize)> = vec![
            (ArithOp::AddConst { reg: r(0), c: 5 }, 1),
            (ArithOp::Negate { reg: r(0) }, 1),
            (ArithOp::AddReg { src: r(0), dst: r(1), subtract: false }, 2),
            (ArithOp::AddReg { src: r(0), dst: r(1), subtract: true }, 2),
            (ArithOp::MulConstAccum { y: r(0), acc: r(1), k: 3 }, 2),
            (ArithOp::MulConstAccum { y: r(0), acc: r(1), k: 2 }, 2),
            (ArithOp::MulRegAccum { x: r(0), y: r(1), acc: r(2), subtract: false }, 3),
            (ArithOp::CopyReg { src: r(0), dst: r(1) }, 2),
        ];
        for (op, arity) in ops {
            if !bijective(n, &op, arity) {
                non_bijective += 1;
            }
        }
    }
    verdict(
        exhaustive == 0 && random == 0 && non_bijective == 0,
        format!(
            "n=4 exhaustive: {exhaustive} errors; n=16 random 1e4: {random} errors; non-bijective ops (n<=6): {non_bijective}"
        ),
    )
}

fn random_gate(rng: &mut ChaCha8Rng, width: usize) -> (Vec<(usize, bool)>, Gate) {
    let q = rng.gen_range(0..width);
    let other = |rng: &mut ChaCha8Rng, not: usize| loop {
        let o = rng.gen_range(0..width);
        if o != not {
            break o;
        }
    };
    let gate = match rng.gen_range(0..6) {
        0 => Gate::X(q),
        1 => Gate::Z(q),
        2 | 3 => Gate::H(q),
        4 if width >= 2 => Gate::Cnot {
            control: q,
            target: other(rng, q),
        },
        5 if width >= 3 => {
            let w = rng.gen_range(2..=width.min(4));
            let off = rng.gen_range(0..=width - w);
            let reg = Register::new(off, w);
            let c = rng.gen_range(1..(1u128 << w));
            let op = ArithOp::AddConst { reg, c };
            op.gate(ModWidth::new(w).unwrap()).unwrap()
        }
        _ => Gate::H(q),
    };
    let used = gate.qubits();
    let mut controls = Vec::new();
    if rng.gen_bool(0.25) {
        let free: Vec<usize> = (0..width).filter(|i| !used.contains(i)).collect();
        if !free.is_empty() {
            controls.push((free[rng.gen_range(0..free.len())], rng.gen_bool(0.5)));
        }
    }
    (controls, gate)
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let width = rng.gen_range(1..=10);
        let gates = rng.gen_range(1..=50);
        let mut sparse = SparseState::zero(width);
        let mut dense = DenseState::zero(width).unwrap();
        for _ in 0..gates {
            let (controls, gate) = random_gate(&mut rng, width);
            sparse.apply_controlled(&controls, &gate).unwrap();
            dense.apply_controlled(&controls, &gate).unwrap();
        }
        worst = worst.max(dense.max_abs_diff(&sparse).unwrap());
    }
    // one hand-written permutation too: rotate a 3-bit register
    let rot = Permutation::new("rot", vec![Register::new(0, 3)], |v| {
        v[0] = ((v[0] << 1) | (v[0] >> 2)) & 7
    })
    .unwrap();
    let mut s = SparseState::zero(4);
    let mut d = DenseState::zero(4).unwrap();
    for g in [Gate::H(0), Gate::H(3), Gate::Permute(rot.clone()), Gate::Permute(rot)] {
        s.apply(&g).unwrap();
        d.apply(&g).unwrap();
    }
    worst = worst.max(d.max_abs_diff(&s).unwrap());
    verdict(worst <= 1e-10, format!("100 random circuits, max |Δamp| = {worst:.3e}"))
}

fn within(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

fn criterion_5() -> Verdict {
    const TRIALS: u64 = 10_000;
    const TOL: f64 = 0.02;
    let p = ProblemParams::new(2).unwrap();
    let alice = Circle::new(2, 3, 1);
    let bob = Circle::new(1, 1, 2);
    let run = |s: AttackStrategy, seed| run_attack_trials(&s, &alice, &bob, &p, TRIALS, seed).unwrap();

    let dm = run(AttackStrategy::BobDirectMeasure { which: Target::One }, 51);
    let em = run(AttackStrategy::BobEntangleMeasure { which: Target::One }, 52);
    let ir = run(AttackStrategy::BobInterceptResend { which: Target::One }, 53);
    let parts = [
        ("a", within(dm.learned_x.rate, 0.5, TOL), format!("learned {:.4}", dm.learned_x.rate)),
        (
            "b",
            within(dm.learned_and_concealed.rate, 0.25, TOL),
            format!("concealed {:.4}", dm.learned_and_concealed.rate),
        ),
        (
            "c",
            within(dm.inconsistent_abort.rate, 0.5, TOL),
            format!("consistency {:.4}", dm.inconsistent_abort.rate),
        ),
        (
            "d",
            within(em.t1_plus.rate, 0.5, TOL)
                && within(em.t1_minus.rate, 0.5, TOL)
                && em.honesty_passed.count == TRIALS,
            format!(
                "p+ {:.4} p- {:.4} honesty {:.4}",
                em.t1_plus.rate, em.t1_minus.rate, em.honesty_passed.rate
            ),
        ),
        (
            "e",
            ir.honesty_passed.count == TRIALS,
            format!("resend honesty {:.4}", ir.honesty_passed.rate),
        ),
    ];
    let detail = parts
        .iter()
        .map(|(k, ok, d)| format!("({k}) {d} {}", if *ok { "ok" } else { "FAIL" }))
        .collect::<Vec<_>>()
        .join("; ");
    verdict(parts.iter().all(|(_, ok, _)| *ok), detail)
}

fn criterion_6() -> Verdict {
    let ts = [4usize, 8, 16, 32];
    let (table, _) = cost_table(&ts, 0).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for w in table.rows.windows(2) {
        let ratio = w[1].elementary_units as f64 / w[0].elementary_units as f64;
        let pass = (3.2..=4.8).contains(&ratio);
        ok &= pass;
        notes.push(format!(
            "cost({})/cost({}) = {ratio:.3}{}",
            w[1].t,
            w[0].t,
            if pass { "" } else { " (out of [3.2, 4.8])" }
        ));
    }
    for r in &table.rows {
        let n = 2 * r.t + 3;
        let m = 3 * n;
        // h1, t1, h2, t2 plus a, e1..e3, g1..g3
        let layout = 4 * m + 6 * n + 1;
        if r.tracked_qubits != layout || r.tracked_qubits != 18 * n + 1 {
            ok = false;
            notes.push(format!("t={} tracked {} != {layout}", r.t, r.tracked_qubits));
        }
        if r.messages_per_direction != 2 || r.qubits_per_message != m {
            ok = false;
            notes.push(format!("t={} messages {}x{}", r.t, r.messages_per_direction, r.qubits_per_message));
        }
    }
    let linear = table
        .rows
        .windows(2)
        .all(|w| (w[1].tracked_qubits - w[0].tracked_qubits) == 36 * (w[1].t - w[0].t));
    ok &= linear;
    notes.push(format!(
        "qubits {} linear; messages 2 per direction of m qubits",
        if linear { "exactly" } else { "NOT" }
    ));
    verdict(ok, notes.join("; "))
}

fn criterion_7(s: &SweepOutcome) -> Verdict {
    verdict(
        s.max_terms <= 2,
        format!("max terms per pair across {} honest runs: {}", s.pairs, s.max_terms),
    )
}

fn main() -> ExitCode {
    let sweep = honest_sweep_t2();
    let results = [
        ("1", "protocol correctness, t=2 exhaustive", criterion_1(&sweep)),
        ("2", "oracle phase soundness", criterion_2()),
        ("3", "arithmetic soundness", criterion_3()),
        ("4", "sparse vs dense simulator", criterion_4()),
        ("5", "attack probabilities", criterion_5()),
        ("6", "complexity scaling", criterion_6()),
        ("7", "honest-run sparsity", criterion_7(&sweep)),
    ];
    let mut failed = 0;
    for (id, name, v) in &results {
        println!(
            "criterion {id} {}: {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += (!v.pass) as usize;
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
