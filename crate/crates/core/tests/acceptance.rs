//! Acceptance checks, one line per criterion. Exits non-zero on any failure.
//!
//! Probabilities are recomputed here with a brute-force truth table that
//! shares no code with the library's evaluators.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;

use dissoc::bounds::{compute_bound, refute_better_assignment, Direction, PlanChoice};
use dissoc::dissociation::TemplateKind;
use dissoc::events::{correlated_pair, encode_disjoint, DisjointDeclaration};
use dissoc::figures::{rho_min, sweep_correlation};
use dissoc::identities::verify_identities;
use dissoc::verify::{random_expr, random_grid_probs, random_template_instance, rng_for, var_names};
use dissoc::{parse_expr, Expr, Prob, ProbAssignment};

const FLOAT_TOL: f64 = 1e-9;

type Check = fn() -> Result<String, String>;

fn truth(e: &Expr, world: &BTreeMap<&str, bool>) -> bool {
    match e {
        Expr::Var(v) => world[v.as_str()],
        Expr::Const(b) => *b,
        Expr::Not(c) => !truth(c, world),
        Expr::And(cs) => cs.iter().all(|c| truth(c, world)),
        Expr::Or(cs) => cs.iter().any(|c| truth(c, world)),
    }
}

/// Sum of world weights over satisfying assignments, exact for rationals.
fn oracle(e: &Expr, probs: &ProbAssignment) -> Prob {
    let vars: Vec<String> = e.free_vars().into_iter().collect();
    assert!(vars.len() <= 20, "oracle limited to 20 variables");
    let mut total = Prob::zero();
    for mask in 0u32..(1 << vars.len()) {
        let mut world = BTreeMap::new();
        let mut weight = Prob::one();
        for (i, v) in vars.iter().enumerate() {
            let bit = mask >> i & 1 == 1;
            let p = probs.get(v).expect("probability for every variable");
            weight = if bit { weight * p } else { weight * p.complement() };
            world.insert(v.as_str(), bit);
        }
        if truth(e, &world) {
            total = total + weight;
        }
    }
    total
}

fn tenths(ks: &[i64]) -> Vec<Prob> {
    ks.iter().map(|k| Prob::ratio(*k, 10)).collect()
}

fn check_dnf_example() -> Result<String, String> {
    let start = Instant::now();
    let phi = parse_expr("x1&x3|x1&x4|x2&x4").map_err(|e| e.to_string())?;
    let probs = ProbAssignment::uniform(["x1", "x2", "x3", "x4"], Prob::half());
    let o = compute_bound(&phi, "x4", Direction::Upper, &probs, &PlanChoice::Symmetric)
        .map_err(|e| e.to_string())?;
    let exact = oracle(&phi, &probs);
    let bound = oracle(&o.dissociation.dissociated, &o.dissociated_probs);
    let elapsed = start.elapsed();
    let ok = exact == Prob::half()
        && bound == Prob::ratio(17, 32)
        && o.report.exact == exact
        && o.report.bound == bound
        && o.report.exact.is_exact()
        && o.report.bound.is_exact()
        && elapsed < Duration::from_secs(1);
    let msg = format!("exact {} bound {} in {elapsed:.2?}", o.report.exact, o.report.bound);
    if ok { Ok(msg) } else { Err(msg) }
}

fn check_disjoint_encoding() -> Result<String, String> {
    let targets = [(1, 5), (1, 2), (1, 5), (1, 10)];
    let decl = DisjointDeclaration::unlabeled(
        targets.iter().map(|&(n, d)| BigRational::new(n.into(), d.into())).collect(),
    );
    let enc = encode_disjoint(&decl).map_err(|e| e.to_string())?;
    let want_y = [Prob::ratio(1, 5), Prob::ratio(5, 8), Prob::ratio(2, 3)];
    if enc.y_probs != want_y {
        return Err(format!("y probabilities {:?}", enc.y_probs));
    }
    let probs = enc.assignment();
    for (i, ev) in enc.events.iter().enumerate() {
        let got = oracle(ev, &probs);
        let want = Prob::ratio(targets[i].0, targets[i].1);
        if got != want {
            return Err(format!("P[A{}] = {got}, expected {want}", i + 1));
        }
        for other in &enc.events[i + 1..] {
            let both = Expr::And(vec![ev.clone(), other.clone()]);
            if !oracle(&both, &probs).is_zero() {
                return Err(format!("events {ev} and {other} overlap"));
            }
        }
    }
    Ok("y = 1/5 5/8 2/3, marginals and disjointness confirmed over 2^3".into())
}

fn check_soundness() -> Result<String, String> {
    const CASES: usize = 2000;
    let start = Instant::now();
    let mut rng = rng_for(2024, 0);
    let mut cells = BTreeMap::new();
    for i in 0..CASES {
        let inst = random_template_instance(&mut rng);
        let o = compute_bound(
            &inst.expr,
            "x",
            inst.direction,
            &inst.probs,
            &PlanChoice::Explicit(inst.plan.clone()),
        )
        .map_err(|e| format!("case {i} ({}): {e}", inst.expr))?;
        let exact = oracle(&inst.expr, &inst.probs);
        let bound = oracle(&o.dissociation.dissociated, &o.dissociated_probs);
        if !exact.is_exact() || !bound.is_exact() {
            return Err(format!("case {i}: arithmetic left the rationals"));
        }
        let ok = match inst.direction {
            Direction::Upper => bound >= exact,
            Direction::Lower => bound <= exact,
        };
        if !ok || bound != o.report.bound || exact != o.report.exact {
            return Err(format!(
                "case {i}: {} {} exact {exact} bound {bound}",
                inst.expr, inst.direction
            ));
        }
        *cells.entry((inst.template.kind.to_string(), inst.direction.to_string())).or_insert(0) += 1;
    }
    let elapsed = start.elapsed();
    if cells.len() != 4 {
        return Err(format!("only {} of 4 cells exercised", cells.len()));
    }
    if elapsed >= Duration::from_secs(60) {
        return Err(format!("{CASES} instances took {elapsed:.2?}"));
    }
    Ok(format!("{CASES} instances, 0 violations, {cells:?}, {elapsed:.2?}"))
}

/// `|bound − exact|` for `x` dissociated across a correlated pair.
fn pair_gaps(p: &Prob, q: &Prob, rho: &Prob, kind: TemplateKind, dir: Direction) -> Result<f64, String> {
    let pair = correlated_pair(q, rho).map_err(|e| e.to_string())?;
    let x = Expr::var("x");
    let expr = match kind {
        TemplateKind::Disjunctive => Expr::Or(vec![
            Expr::And(vec![x.clone(), pair.a.clone()]),
            Expr::And(vec![x, pair.b.clone()]),
        ]),
        TemplateKind::Conjunctive => Expr::And(vec![
            Expr::Or(vec![x.clone(), pair.a.clone()]),
            Expr::Or(vec![x, pair.b.clone()]),
        ]),
    };
    let mut probs = pair.assignment();
    probs.set("x", p.clone()).map_err(|e| e.to_string())?;
    let o = compute_bound(&expr, "x", dir, &probs, &PlanChoice::Symmetric).map_err(|e| e.to_string())?;
    let exact = oracle(&expr, &probs);
    let bound = oracle(&o.dissociation.dissociated, &o.dissociated_probs);
    Ok((bound - exact).abs().to_f64())
}

fn check_tightness() -> Result<String, String> {
    let ps = tenths(&[1, 3, 5, 7, 9]);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut record = |gap: f64, what: String| -> Result<(), String> {
        checked += 1;
        worst = worst.max(gap);
        if gap > FLOAT_TOL {
            Err(format!("{what}: gap {gap:e}"))
        } else {
            Ok(())
        }
    };
    for p in &ps {
        for q in tenths(&[1, 2, 3, 4, 5, 6, 7, 8, 9]) {
            let one = Prob::one();
            record(
                pair_gaps(p, &q, &one, TemplateKind::Conjunctive, Direction::Upper)?,
                format!("rho=1 conj upper p={p} q={q}"),
            )?;
            record(
                pair_gaps(p, &q, &one, TemplateKind::Disjunctive, Direction::Lower)?,
                format!("rho=1 disj lower p={p} q={q}"),
            )?;
            let rmin = rho_min(&q).map_err(|e| e.to_string())?;
            if q <= Prob::half() {
                record(
                    pair_gaps(p, &q, &rmin, TemplateKind::Disjunctive, Direction::Upper)?,
                    format!("rho_min disj upper p={p} q={q}"),
                )?;
            }
            if q >= Prob::half() {
                let pair = correlated_pair(&q, &rmin).map_err(|e| e.to_string())?;
                let pab = oracle(&Expr::And(vec![pair.a.clone(), pair.b.clone()]), &pair.assignment());
                let want = Prob::ratio(2, 1) * &q - Prob::one();
                if !pab.eq_tol(&want, FLOAT_TOL) {
                    return Err(format!("q={q}: P[AB] = {pab}, expected {want}"));
                }
                record(
                    pair_gaps(p, &q, &rmin, TemplateKind::Conjunctive, Direction::Lower)?,
                    format!("pab=2q-1 conj lower p={p} q={q}"),
                )?;
            }
        }
    }
    Ok(format!("{checked} anchors, worst |bound - exact| {worst:e}"))
}

fn check_sweep() -> Result<String, String> {
    let grid = tenths(&[1, 3, 5, 7, 9]);
    let start = Instant::now();
    let sweep = sweep_correlation(&grid, &grid, 50).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if sweep.rows.len() != 25 * 50 {
        return Err(format!("{} rows", sweep.rows.len()));
    }
    if let Some(r) = sweep.rows.iter().find(|r| !r.is_ordered(FLOAT_TOL)) {
        return Err(format!("row out of order: {r:?}"));
    }
    if sweep.max_discrepancy > FLOAT_TOL {
        return Err(format!("closed forms off by {:e}", sweep.max_discrepancy));
    }
    // Spot-check rows against the truth table.
    for r in sweep.rows.iter().step_by(97) {
        let pair = correlated_pair(&Prob::approx(r.q), &Prob::approx(r.rho)).map_err(|e| e.to_string())?;
        let pab = oracle(&Expr::And(vec![pair.a.clone(), pair.b.clone()]), &pair.assignment());
        if (pab.to_f64() - r.pab).abs() > FLOAT_TOL {
            return Err(format!("row {r:?}: truth table P[AB] {pab}"));
        }
    }
    if elapsed >= Duration::from_secs(10) {
        return Err(format!("sweep took {elapsed:.2?}"));
    }
    Ok(format!(
        "{} rows ordered, max closed-form discrepancy {:e}, {elapsed:.2?}",
        sweep.rows.len(),
        sweep.max_discrepancy
    ))
}

fn check_identities() -> Result<String, String> {
    const PAIRS: usize = 10_000;
    let start = Instant::now();
    let mut rng = rng_for(77, 0);
    for i in 0..PAIRS {
        let vars = var_names("v", 1 + i % 8);
        let a = random_expr(&mut rng, &vars, 3);
        let b = random_expr(&mut rng, &vars, 3);
        let probs = random_grid_probs(&mut rng, &vars);
        let r = verify_identities(&a, &b, &probs).map_err(|e| e.to_string())?;
        let residuals_zero = r.residuals().iter().all(|x| x.is_exact() && x.is_zero());
        let both = Expr::And(vec![a.clone(), b.clone()]);
        let either = Expr::Or(vec![a.clone(), b.clone()]);
        let agrees = r.p_a == oracle(&a, &probs)
            && r.p_b == oracle(&b, &probs)
            && r.p_and == oracle(&both, &probs)
            && r.p_or == oracle(&either, &probs);
        if !residuals_zero || !agrees {
            return Err(format!("pair {i}: A={a}, B={b}"));
        }
    }
    Ok(format!("{PAIRS} pairs, all residuals exactly 0, {:.2?}", start.elapsed()))
}

fn check_refuter() -> Result<String, String> {
    let p = Prob::half();
    let worse = [Prob::ratio(3, 5), Prob::ratio(3, 5)];
    let witness = refute_better_assignment(TemplateKind::Disjunctive, Direction::Upper, &p, 2, &worse)
        .ok_or("no witness against [p+0.1, p+0.1]")?;
    let mut line = format!(
        "witness on {} family: {} vs tight {}",
        witness.instance.family, witness.candidate_bound, witness.tight_bound
    );
    for kind in [TemplateKind::Disjunctive, TemplateKind::Conjunctive] {
        for dir in [Direction::Upper, Direction::Lower] {
            for pv in tenths(&[1, 3, 5, 7, 9]) {
                let tight = dissoc::assign_symmetric(kind, dir, &pv, 2);
                if let Some(w) = refute_better_assignment(kind, dir, &pv, 2, &tight) {
                    return Err(format!("{kind}/{dir} p={pv}: spurious witness on {}", w.instance.family));
                }
            }
        }
    }
    line.push_str("; none found for the four tight families");
    Ok(line)
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 7] = [
        ("dnf example exact 1/2, upper bound 17/32", check_dnf_example),
        ("disjoint encoding of (1/5, 1/2, 1/5, 1/10)", check_disjoint_encoding),
        ("soundness of the four directional inequalities", check_soundness),
        ("tightness anchors", check_tightness),
        ("correlation sweep ordering and closed forms", check_sweep),
        ("probability identities", check_identities),
        ("refuter sanity", check_refuter),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
