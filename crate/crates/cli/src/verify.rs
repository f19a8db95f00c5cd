use hypercyclic::{
    conjugate_schedule, conjugate_tuple, dual_similarity_audit, orbit_report_with_times, pair, similarity_audit,
    Construction, OperatorExpr, Scalar, SparseFunctional, SparseVector, SynthesisCertificate, TargetSchedule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{Check, Report, ReportBody, VerificationOutcome};
use crate::{schedule_for, RunConfig};

/// Dual audits multiply support and size by the horizon, so they use a
/// shorter default walk.
const DUAL_AUDIT_HORIZON: usize = 50;
const PROBES: usize = 16;

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.0.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }
}

pub(crate) fn verify_report(source: &Report, cfg: &RunConfig) -> VerificationOutcome {
    let mut checks = Checks(Vec::new());
    let (kind, orbit) = match &source.body {
        ReportBody::Synthesis { schedule, certificate, .. } => {
            check_schedule(&mut checks, &source.config, schedule);
            check_certificate(&mut checks, certificate, schedule);
            ("synthesis", None)
        }
        ReportBody::Construction { construction, .. } => {
            check_schedule(&mut checks, &source.config, &construction.schedule);
            check_certificate(&mut checks, &construction.certificate, &construction.schedule);
            ("construction", check_construction(&mut checks, construction, cfg))
        }
        ReportBody::Verification(_) => {
            checks.push("source", false, "cannot verify a verification report");
            ("verification", None)
        }
    };
    let verdict = checks.0.iter().all(|c| c.passed) && orbit.as_ref().is_none_or(|o| o.verdict);
    VerificationOutcome { source_kind: kind.to_string(), checks: checks.0, orbit, verdict }
}

fn check_schedule(checks: &mut Checks, cfg: &RunConfig, schedule: &TargetSchedule) {
    match schedule_for(cfg) {
        Ok(expected) => {
            let ok = &expected == schedule;
            checks.push("schedule", ok, if ok { "matches recorded config" } else { "differs from recorded config" });
        }
        Err(e) => checks.push("schedule", false, e.to_string()),
    }
}

fn check_certificate(checks: &mut Checks, cert: &SynthesisCertificate, schedule: &TargetSchedule) {
    match cert.verify_post_hoc(schedule) {
        Ok(v) => {
            let good = v.iter().filter(|c| c.passed()).count();
            checks.push("certificate", good == v.len(), format!("{good}/{} visits pass", v.len()));
        }
        Err(e) => checks.push("certificate", false, e.to_string()),
    }
}

fn check_construction(checks: &mut Checks, c: &Construction, cfg: &RunConfig) -> Option<hypercyclic::OrbitReport> {
    let art = &c.artifact;
    let m = art.arity();
    let horizon = cfg.horizon_override.unwrap_or(c.certificate.horizon);

    let base_ok = art.base == OperatorExpr::weighted_backward_shift(c.certificate.lambda.clone());
    checks.push("base", base_ok, format!("weighted shift, lambda = {}", c.certificate.lambda));

    let shapes_ok = art.similarities.len() == m
        && art.sources.len() == m
        && art.scales.len() == m
        && c.certificate.vectors.len() == m;
    checks.push("shape", shapes_ok, format!("arity {m}"));
    if !shapes_ok {
        return None;
    }

    let tuple_ok = conjugate_tuple(&art.base, &art.similarities).is_ok_and(|t| t == art.tuple);
    checks.push("tuple", tuple_ok, "each R_j = S_j T S_j^-1");

    let sources_ok =
        art.sources.iter().zip(&art.scales).zip(&c.certificate.vectors).all(|((s, k), v)| *s == v.scaled(k));
    checks.push("sources", sources_ok, "x_j = c_j * certificate vector");

    checks.push("consistency", art.is_consistent(), "S_j x_j = x");

    let sim = similarity_audit(art, horizon);
    checks.push("similarity_audit", sim, format!("n <= {horizon}"));

    if art.dual.is_some() {
        let h = cfg.horizon_override.unwrap_or(DUAL_AUDIT_HORIZON.min(horizon));
        match dual_similarity_audit(art, h) {
            Ok(ok) => checks.push("dual_similarity_audit", ok, format!("n <= {h}")),
            Err(e) => checks.push("dual_similarity_audit", false, e.to_string()),
        }
    }

    let (probes_ok, detail) = probe_checks(&art.similarities, art.tuple.ops(), cfg.seed);
    checks.push("random_probes", probes_ok, detail);

    let image = match conjugate_schedule(&c.schedule, &art.similarities, &art.scales) {
        Ok(s) => s,
        Err(e) => {
            checks.push("orbit", false, e.to_string());
            return None;
        }
    };
    let mut times = vec![0usize; c.schedule.len()];
    for v in &c.certificate.visits {
        if let Some(t) = times.get_mut(v.target) {
            *t = v.time;
        }
    }
    match orbit_report_with_times(&art.tuple, &art.common_vector, &image, horizon, Some(&times)) {
        Ok(r) => Some(r),
        Err(e) => {
            checks.push("orbit", false, e.to_string());
            None
        }
    }
}

fn random_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    Scalar::ratio(rng.gen_range(-9..=9), rng.gen_range(1..=4))
}

fn random_entries(rng: &mut ChaCha8Rng) -> Vec<(usize, Scalar)> {
    (0..rng.gen_range(1..=4)).map(|_| (rng.gen_range(0..12), random_scalar(rng))).collect()
}

/// Seeded spot checks: `S⁻¹Sv = v` and `⟨f, Rv⟩ = ⟨R′f, v⟩`.
fn probe_checks(similarities: &[OperatorExpr], tuple: &[OperatorExpr], seed: u64) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inverses: Vec<_> = match similarities.iter().map(OperatorExpr::inverse).collect::<Result<Vec<_>, _>>() {
        Ok(v) => v,
        Err(e) => return (false, e.to_string()),
    };
    let mut failed = 0;
    for _ in 0..PROBES {
        let v = SparseVector::from_entries(random_entries(&mut rng));
        let f = SparseFunctional::from_entries(random_entries(&mut rng));
        for (s, s_inv) in similarities.iter().zip(&inverses) {
            if s_inv.apply(&s.apply(&v)) != v {
                failed += 1;
            }
        }
        for r in tuple {
            if pair(&f, &r.apply(&v)) != pair(&r.dual_apply(&f), &v) {
                failed += 1;
            }
        }
    }
    (failed == 0, format!("{PROBES} probes, seed {seed}, {failed} failures"))
}
