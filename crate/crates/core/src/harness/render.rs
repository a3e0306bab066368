use std::fmt::Write as _;

use super::commands::{Check, Relation, Report, Results};
use super::config::Format;
use crate::error::{Error, Result};
use crate::protocol::{ProtocolOutcome, StageRecord, Transcript};

pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => serde_json::to_string_pretty(report)
            .map(|s| s + "\n")
            .map_err(|e| Error::Io(e.to_string())),
        Format::Text => Ok(text(report)),
        Format::Csv => Ok(csv(report)),
    }
}

fn outcome_label(o: &ProtocolOutcome) -> String {
    match o {
        ProtocolOutcome::Intersect => "Intersect".into(),
        ProtocolOutcome::Disjoint => "Disjoint".into(),
        ProtocolOutcome::Abort(r) => format!("Abort({r:?})"),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn check_line(c: &Check) -> String {
    let bound = match c.relation {
        Relation::Within if c.tolerance == 0.0 => format!("= {}", c.expected),
        Relation::Within => format!("{} ± {}", c.expected, c.tolerance),
        Relation::AtMost => format!("≤ {}", c.expected),
    };
    format!(
        "{} {:<28} observed {:<10.6} expected {bound}",
        if c.pass { "PASS" } else { "FAIL" },
        c.name,
        c.observed
    )
}

fn transcript_summary(out: &mut String, tr: &Transcript, outcome: &ProtocolOutcome) {
    let _ = writeln!(out, "t = {} (n = {}, m = {})", tr.params.t(), tr.params.n(), tr.params.m());
    let _ = writeln!(out, "alice: {}  bob: {}", tr.alice, tr.bob);
    let _ = writeln!(out, "seed: {}", tr.seed);
    let _ = writeln!(out, "honesty: h1 = {}  h2 = {}", opt(tr.honesty.h1.as_deref()), opt(tr.honesty.h2.as_deref()));
    let _ = writeln!(
        out,
        "signs: t1 = {}  t2 = {}",
        opt(tr.signs.t1.map(|s| s.symbol())),
        opt(tr.signs.t2.map(|s| s.symbol()))
    );
    let _ = writeln!(out, "max terms per pair: {}", tr.max_terms);
    let _ = writeln!(out, "outcome: {}", outcome_label(outcome));
}

/// Splits a dump line's bitstring into the t (high) and h (low) halves.
fn stage_terms(st: &StageRecord, m: usize) -> Vec<(String, String)> {
    let Some(dump) = &st.dump else {
        return Vec::new();
    };
    dump.lines()
        .filter_map(|line| {
            let mut parts = line.split_whitespace();
            let bits = parts.next()?;
            let amp = parts.collect::<Vec<_>>().join(" ");
            let w = bits.len();
            let regs = if w >= 2 * m {
                let t = u128::from_str_radix(&bits[w - 2 * m..w - m], 2).ok()?;
                let h = u128::from_str_radix(&bits[w - m..], 2).ok()?;
                format!("h = {h:<6} t = {t:<6}")
            } else {
                bits.to_string()
            };
            Some((regs, amp))
        })
        .collect()
}

fn text(report: &Report) -> String {
    let mut out = String::new();
    match &report.results {
        Results::Decide(d) => transcript_summary(&mut out, &d.transcript, &d.outcome),
        Results::Trace(tr) => {
            let m = tr.transcript.params.m();
            for st in &tr.transcript.stages {
                let _ = writeln!(
                    out,
                    "[{:?}] pair {}: {} terms on {} qubits",
                    st.stage, st.pair, st.terms, st.width
                );
                for (regs, amp) in stage_terms(st, m) {
                    let _ = writeln!(out, "    {regs} {amp}");
                }
            }
            out.push('\n');
            transcript_summary(&mut out, &tr.transcript, &tr.outcome);
        }
        Results::Verify(s) => {
            let _ = writeln!(
                out,
                "t = {}  {} sweep: {} pairs, {} intersecting",
                s.t,
                if s.exhaustive { "exhaustive" } else { "sampled" },
                s.pairs,
                s.intersecting
            );
            let _ = writeln!(out, "mismatches: {}", s.mismatches);
            for mm in &s.mismatch_examples {
                let _ = writeln!(
                    out,
                    "  alice {} bob {}: expected {} got {}",
                    mm.alice,
                    mm.bob,
                    mm.expected,
                    outcome_label(&mm.outcome)
                );
            }
            let _ = writeln!(out, "max terms per pair: {}", s.max_terms);
        }
        Results::Attack(st) => {
            let _ = writeln!(
                out,
                "{} at t = {}: {} trials, seed {}",
                st.name,
                st.params.t(),
                st.trials,
                st.seed
            );
            let _ = writeln!(out, "{:<24} {:>8} {:>10} {:>10}", "metric", "count", "rate", "ci95");
            for (name, r) in st.metrics() {
                let _ = writeln!(out, "{name:<24} {:>8} {:>10.4} {:>10.4}", r.count, r.rate, r.ci95);
            }
        }
        Results::Superposed(s) => {
            let _ = writeln!(out, "superposed query on {} qubits, {} shots, seed {}", s.width, s.shots, s.seed);
            let _ = writeln!(out, "marked inputs: {}", s.marked_states);
            let _ = writeln!(out, "P(all zeros): {:.6}", s.zero_probability);
            let _ = writeln!(out, "nonzero outcomes: {} of {} shots ({} distinct)", s.nonzero_shots, s.shots, s.distinct_outcomes);
            let _ = writeln!(out, "at most {} classical bits per query", s.max_bits_per_query);
            for (bits, c) in &s.top_outcomes {
                let _ = writeln!(out, "  {bits} {c}");
            }
        }
        Results::Cost(table) => {
            let _ = writeln!(
                out,
                "{:>4} {:>4} {:>5} {:>14} {:>7} {:>7} {:>8} {:>8} {:>8} {:>9} {:>8}",
                "t", "n", "m", "units", "adders", "mults", "1q", "cnot", "qubits", "msgs/dir", "ratio"
            );
            for r in &table.rows {
                let _ = writeln!(
                    out,
                    "{:>4} {:>4} {:>5} {:>14} {:>7} {:>7} {:>8} {:>8} {:>8} {:>9} {:>8}",
                    r.t,
                    r.n,
                    r.m,
                    r.elementary_units,
                    r.adder_runs,
                    r.multiplier_runs,
                    r.single_qubit_gates,
                    r.cnot_gates,
                    r.tracked_qubits,
                    format!("{}x{}", r.messages_per_direction, r.qubits_per_message),
                    r.ratio_to_half.map_or_else(|| "-".into(), |v| format!("{v:.3}"))
                );
            }
        }
    }
    if !report.checks.is_empty() {
        out.push('\n');
        for c in &report.checks {
            out.push_str(&check_line(c));
            out.push('\n');
        }
    }
    if let Some(t) = report.timing {
        let _ = writeln!(out, "wall time: {:.3} s", t.wall_seconds);
    }
    out
}

fn csv(report: &Report) -> String {
    let mut out = String::new();
    match &report.results {
        Results::Decide(d) => {
            let tr = &d.transcript;
            out.push_str("t,alice,bob,seed,outcome,h1,h2,sign1,sign2,max_terms\n");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                tr.params.t(),
                quote(&tr.alice.to_string()),
                quote(&tr.bob.to_string()),
                tr.seed,
                outcome_label(&d.outcome),
                opt(tr.honesty.h1.as_deref()),
                opt(tr.honesty.h2.as_deref()),
                opt(tr.signs.t1.map(|s| s.symbol())),
                opt(tr.signs.t2.map(|s| s.symbol())),
                tr.max_terms
            );
        }
        Results::Trace(tr) => {
            out.push_str("stage,pair,terms,basis,re,im\n");
            for st in &tr.transcript.stages {
                for line in st.dump.iter().flat_map(|d| d.lines()) {
                    let cols: Vec<&str> = line.split_whitespace().collect();
                    let _ = writeln!(
                        out,
                        "{:?},{},{},{}",
                        st.stage,
                        st.pair,
                        st.terms,
                        cols.join(",")
                    );
                }
            }
        }
        Results::Verify(s) => {
            out.push_str("t,exhaustive,pairs,intersecting,mismatches,max_terms\n");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.t, s.exhaustive, s.pairs, s.intersecting, s.mismatches, s.max_terms
            );
        }
        Results::Attack(st) => out.push_str(&st.to_csv()),
        Results::Superposed(s) => {
            out.push_str("outcome,count\n");
            for (bits, c) in &s.top_outcomes {
                let _ = writeln!(out, "{bits},{c}");
            }
        }
        Results::Cost(table) => {
            out.push_str("t,n,m,elementary_units,adder_runs,multiplier_runs,single_qubit_gates,cnot_gates,tracked_qubits,messages_per_direction,qubits_per_message,ratio_to_half\n");
            for r in &table.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.t,
                    r.n,
                    r.m,
                    r.elementary_units,
                    r.adder_runs,
                    r.multiplier_runs,
                    r.single_qubit_gates,
                    r.cnot_gates,
                    r.tracked_qubits,
                    r.messages_per_direction,
                    r.qubits_per_message,
                    r.ratio_to_half.map_or_else(String::new, |v| format!("{v:.6}"))
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Circle;
    use crate::harness::{cmd_decide, cmd_trace, Mode, RunConfig};

    fn cfg(mode: Mode) -> RunConfig {
        let mut c = RunConfig::new(mode);
        c.seed = 4;
        c.alice = Some(Circle::new(1, 1, 1));
        c.bob = Some(Circle::new(1, 2, 1));
        c
    }

    #[test]
    fn decide_renders_all_formats() {
        let r = cmd_decide(&cfg(Mode::Decide)).unwrap();
        assert!(render(&r, Format::Text).unwrap().contains("outcome: Intersect"));
        let csv = render(&r, Format::Csv).unwrap();
        assert!(csv.lines().nth(1).unwrap().contains("\"1,1,1\""));
        let j: serde_json::Value = serde_json::from_str(&render(&r, Format::Json).unwrap()).unwrap();
        assert_eq!(j["results"]["outcome"], "Intersect");
        assert_eq!(j["config"]["seed"], 4);
    }

    #[test]
    fn trace_text_shows_registers_and_signs() {
        let r = cmd_trace(&cfg(Mode::Trace)).unwrap();
        let txt = render(&r, Format::Text).unwrap();
        assert!(txt.contains("[Prepare] pair 1: 2 terms"));
        assert!(txt.contains("0.707107"));
        assert!(txt.contains("-0.707107"));
        let after: Vec<&str> = txt
            .lines()
            .skip_while(|l| !l.starts_with("[HonestyTest] pair 1"))
            .skip(1)
            .take(2)
            .collect();
        assert!(after.iter().all(|l| l.trim_start().starts_with("h = 0 ")), "{after:?}");
    }

    #[test]
    fn quote_escapes() {
        assert_eq!(quote("a,b"), "\"a,b\"");
        assert_eq!(quote("ab"), "ab");
    }
}
