//! Sampling-based weak membership oracle for the model ideal.
//!
//! Given candidates of which exactly one is a differential-algebraic
//! consequence of the model, the oracle finds that one by evaluating all
//! candidates on truncated power series solutions at random parameter
//! values and initial conditions. A true member vanishes on every
//! solution; a non-member survives a random sample with high probability,
//! and the sampling box doubles each round so the failure probabilities
//! form a convergent product.
//!
//! The default mode runs each trial in a fresh random ~60-bit prime field
//! because exact rational series of high order grow enormous coefficients;
//! a verdict then needs several clean trials in a row. Exact mode is kept
//! for audits: there a single clean trial is already a proof, since a
//! non-member seen to vanish would have been caught as a second zero.

use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::coeff::{FieldCtx, PrimeField, QField};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::poly::QPoly;
use crate::rngutil::{random_prime, stream};
use crate::series::{eval_batch, solve_ode_series, TruncatedSeries};
use crate::vartable::{VarKind, VarTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    /// Fresh random prime per trial; `trials` agreeing clean rounds decide.
    Modular,
    /// Exact rational arithmetic; one clean round decides.
    Exact,
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub seed: u64,
    pub mode: OracleMode,
    /// Clean agreeing trials required in modular mode.
    pub trials: usize,
    /// Initial sampling bound D; values are drawn from [1, D].
    pub initial_bound: u64,
    /// Doubling rounds before giving up with MaxIterationsExceeded.
    pub max_doublings: u32,
    /// Bad-sample retries (vanishing Q, unlucky prime) across one call.
    pub max_resamples: u32,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            seed: 0,
            mode: OracleMode::Modular,
            trials: 5,
            initial_bound: 1,
            max_doublings: 30,
            max_resamples: 200,
        }
    }
}

/// An additive change of coordinates x -> x + num/den (parameters only in
/// num and den), recorded when elimination rewrites projections. Sampled
/// trajectories are shifted accordingly before candidates are evaluated.
#[derive(Clone, Debug)]
pub struct VarShift {
    /// Base variable (order 0) the shift applies to.
    pub var: usize,
    pub num: QPoly,
    pub den: QPoly,
}

/// One completed sampling round, for determinism tests and diagnostics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialRecord {
    pub bound: u64,
    pub prime: Option<u64>,
    /// Indices of candidates that evaluated to zero.
    pub zeros: Vec<usize>,
}

/// Anything elimination can ask to pick the in-ideal candidate. The real
/// implementation samples the model; tests may script answers.
pub trait IdealSelector {
    fn select(&mut self, candidates: &[QPoly], table: &VarTable) -> Result<usize>;

    /// Elimination reports coordinate shifts here so later candidate
    /// evaluations happen in the current coordinates. Default: ignore.
    fn record_shift(&mut self, _shift: VarShift) {}
}

pub struct MembershipOracle<'a> {
    model: &'a Model,
    cfg: OracleConfig,
    shifts: Vec<VarShift>,
    calls: u64,
    transcript: Vec<TrialRecord>,
}

impl<'a> MembershipOracle<'a> {
    pub fn new(model: &'a Model, cfg: OracleConfig) -> Result<Self> {
        if cfg.trials == 0 {
            return Err(Error::usage("oracle needs at least one trial"));
        }
        if cfg.initial_bound == 0 {
            return Err(Error::usage("sampling bound must be positive"));
        }
        Ok(MembershipOracle { model, cfg, shifts: Vec::new(), calls: 0, transcript: Vec::new() })
    }

    pub fn shifts(&self) -> &[VarShift] {
        &self.shifts
    }

    /// Rounds of the most recent `weak_membership` call.
    pub fn last_transcript(&self) -> &[TrialRecord] {
        &self.transcript
    }

    /// Pick the unique candidate lying in the model ideal.
    ///
    /// The caller guarantees exactly one candidate is a member; if none
    /// is, every round ends ambiguous and the call fails with
    /// `MaxIterationsExceeded` once the doubling budget is spent.
    pub fn weak_membership(&mut self, candidates: &[QPoly], table: &VarTable) -> Result<usize> {
        if candidates.is_empty() {
            return Err(Error::usage("no candidates given"));
        }
        if candidates.iter().any(|c| c.is_zero()) {
            return Err(Error::usage("candidates must be nonzero"));
        }
        self.transcript.clear();
        if candidates.len() == 1 {
            return Ok(0);
        }
        let call_id = self.calls;
        self.calls += 1;
        let mut rng = stream(self.cfg.seed, &format!("membership-{call_id}"));

        // Series order: the highest derivative appearing anywhere.
        let h = candidates
            .iter()
            .flat_map(|c| c.support())
            .map(|v| table.order(v) as usize)
            .max()
            .unwrap_or(0);

        let mut bound = self.cfg.initial_bound;
        let mut streak_idx = usize::MAX;
        let mut streak = 0usize;
        let mut resamples = 0u32;

        for _ in 0..self.cfg.max_doublings {
            let (prime, zeros) = loop {
                let attempt = match self.cfg.mode {
                    OracleMode::Modular => {
                        let p = random_prime(&mut rng);
                        let field = PrimeField::new(p)?;
                        self.trial(&field, &mut rng, bound, h, candidates, table)?
                            .map(|z| (Some(p), z))
                    }
                    OracleMode::Exact => self
                        .trial(&QField, &mut rng, bound, h, candidates, table)?
                        .map(|z| (None, z)),
                };
                match attempt {
                    Some(done) => break done,
                    None => {
                        resamples += 1;
                        if resamples > self.cfg.max_resamples {
                            return Err(Error::MaxIterationsExceeded(
                                "membership oracle resampling".into(),
                            ));
                        }
                    }
                }
            };
            self.transcript.push(TrialRecord { bound, prime, zeros: zeros.clone() });
            if zeros.len() == 1 {
                let idx = zeros[0];
                match self.cfg.mode {
                    OracleMode::Exact => return Ok(idx),
                    OracleMode::Modular => {
                        if idx == streak_idx {
                            streak += 1;
                        } else {
                            streak_idx = idx;
                            streak = 1;
                        }
                        if streak >= self.cfg.trials {
                            return Ok(idx);
                        }
                    }
                }
            } else {
                streak_idx = usize::MAX;
                streak = 0;
            }
            bound = bound.saturating_mul(2);
        }
        Err(Error::MaxIterationsExceeded(format!(
            "membership oracle gave no verdict after {} doubling rounds; \
             likely no candidate is in the ideal",
            self.cfg.max_doublings
        )))
    }

    /// One sampling round. `Ok(None)` means the sample was unusable (Q
    /// vanished, or the prime divided a needed denominator) and must be
    /// retried without consuming a doubling step.
    fn trial<F: FieldCtx>(
        &self,
        field: &F,
        rng: &mut ChaCha20Rng,
        bound: u64,
        h: usize,
        candidates: &[QPoly],
        table: &VarTable,
    ) -> Result<Option<Vec<usize>>> {
        let m = self.model;
        // Everything rational must survive the field map; in a prime field
        // a denominator divisible by p spoils the whole trial.
        let conv = |p: &QPoly| p.map_field(field, |c| field.from_rational(c));
        let mut mapped = Vec::with_capacity(candidates.len());
        for p in std::iter::once(m.q()).chain(m.f_num()).chain(m.g_num()) {
            if conv(p).is_err() {
                return Ok(None);
            }
        }
        for c in candidates {
            match conv(c) {
                Ok(mc) => mapped.push(mc),
                Err(_) => return Ok(None),
            }
        }
        let mut shift_parts = Vec::with_capacity(self.shifts.len());
        for s in &self.shifts {
            match (conv(&s.num), conv(&s.den)) {
                (Ok(n), Ok(d)) => shift_parts.push((s.var, n, d)),
                _ => return Ok(None),
            }
        }

        // Random data, all from [1, bound] as plain integers.
        let mut draw = || field.from_i64(rng.gen_range(1..=bound) as i64);
        let mu: Vec<F::Elem> = (0..m.params().len()).map(|_| draw()).collect();
        let x0: Vec<F::Elem> = (0..m.states().len()).map(|_| draw()).collect();
        // Input derivative values u^(j)(0) become coefficients u_j / j!.
        let mut u_series = Vec::with_capacity(m.inputs().len());
        for _ in 0..m.inputs().len() {
            let mut coeffs = Vec::with_capacity(h + 1);
            let mut fact = field.one();
            for j in 0..=h {
                if j > 0 {
                    fact = field.mul(&fact, &field.from_i64(j as i64));
                }
                let inv_fact = field.inv(&fact).ok_or_else(|| {
                    Error::internal("factorial not invertible in the sample field")
                })?;
                coeffs.push(field.mul(&draw(), &inv_fact));
            }
            u_series.push(TruncatedSeries::new(field.clone(), coeffs));
        }

        let sol = match solve_ode_series(m, field, &mu, &x0, &u_series, h + 1) {
            Ok(s) => s,
            Err(Error::DenominatorVanished(_)) => return Ok(None),
            Err(e) => return Err(e),
        };

        // Point for the parameters, used for shifts too.
        let full_dim = table.len().max(m.table().len());
        let mut param_point = vec![field.zero(); full_dim];
        for (i, &p) in m.params().iter().enumerate() {
            param_point[p] = mu[i].clone();
        }
        let mut shift_of = std::collections::HashMap::new();
        for (var, n, d) in &shift_parts {
            let dv = d.eval(&param_point)?;
            let Some(dinv) = field.inv(&dv) else { return Ok(None) };
            let nv = n.eval(&param_point)?;
            let delta = field.mul(&nv, &dinv);
            shift_of
                .entry(*var)
                .and_modify(|acc: &mut F::Elem| *acc = field.add(acc, &delta))
                .or_insert(delta);
        }

        let mut point = std::collections::HashMap::new();
        for c in candidates {
            for v in c.support() {
                if point.contains_key(&v) {
                    continue;
                }
                let val = if table.kind(v) == VarKind::Parameter {
                    param_point[v].clone()
                } else {
                    let base = table.base(v);
                    let k = table.order(v) as usize;
                    let series = sol.series_of(m, base).ok_or_else(|| {
                        Error::internal(format!(
                            "candidate variable {} outside the model",
                            table.display_name(v)
                        ))
                    })?;
                    let mut val = series.derivative_value(k);
                    if k == 0 {
                        if let Some(delta) = shift_of.get(&base) {
                            val = field.add(&val, delta);
                        }
                    }
                    val
                };
                point.insert(v, val);
            }
        }

        let (values, _stats) = eval_batch(&mapped, &point)?;
        let zeros: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| field.is_zero(v))
            .map(|(i, _)| i)
            .collect();
        Ok(Some(zeros))
    }
}

impl IdealSelector for MembershipOracle<'_> {
    fn select(&mut self, candidates: &[QPoly], table: &VarTable) -> Result<usize> {
        self.weak_membership(candidates, table)
    }

    fn record_shift(&mut self, shift: VarShift) {
        self.shifts.push(shift);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generators_to_order, parse_model};
    use crate::poly::lie_derivative;

    const TOY: &str = "states: x\noutputs: y\nx' = x\ny = x^2\n";

    fn var(t: &VarTable, v: usize) -> QPoly {
        QPoly::var(QField, v).with_table(t)
    }

    fn int(n: i64) -> QPoly {
        QPoly::from_int(n)
    }

    #[test]
    fn toy_output_derivative_relation() {
        let m = parse_model(TOY).unwrap();
        let mut t = m.table().clone();
        let y = m.outputs()[0];
        let ydot = t.derivative(y, 1).unwrap();
        let member = var(&t, ydot).sub(&var(&t, y).scale(&QField.from_i64(2))).unwrap();
        let decoy = var(&t, ydot).add(&var(&t, y).scale(&QField.from_i64(2))).unwrap();
        let mut oracle = MembershipOracle::new(&m, OracleConfig::default()).unwrap();
        assert_eq!(oracle.weak_membership(&[member, decoy], &t).unwrap(), 0);
        // Doubling schedule: trial t sees bound 2^(t-1) * D0.
        for (i, rec) in oracle.last_transcript().iter().enumerate() {
            assert_eq!(rec.bound, 1 << i);
        }
    }

    #[test]
    fn determinism_under_seed() {
        let m = parse_model(TOY).unwrap();
        let mut t = m.table().clone();
        let y = m.outputs()[0];
        let ydot = t.derivative(y, 1).unwrap();
        let member = var(&t, ydot).sub(&var(&t, y).scale(&QField.from_i64(2))).unwrap();
        let decoy = var(&t, ydot).add(&int(7)).unwrap();
        let cands = [member, decoy];
        let cfg = OracleConfig { seed: 42, ..OracleConfig::default() };
        let mut o1 = MembershipOracle::new(&m, cfg.clone()).unwrap();
        let mut o2 = MembershipOracle::new(&m, cfg).unwrap();
        let i1 = o1.weak_membership(&cands, &t).unwrap();
        let i2 = o2.weak_membership(&cands, &t).unwrap();
        assert_eq!(i1, i2);
        assert_eq!(o1.last_transcript(), o2.last_transcript());
        assert!(!o1.last_transcript().is_empty());
    }

    #[test]
    fn harmonic_second_order_relation() {
        let m =
            parse_model("states: x1, x2\noutputs: y\nx1' = -x2\nx2' = x1\ny = x1\n").unwrap();
        let mut t = m.table().clone();
        let y = m.outputs()[0];
        let yddot = t.derivative(y, 2).unwrap();
        let member = var(&t, yddot).add(&var(&t, y)).unwrap();
        let decoy = var(&t, yddot).sub(&var(&t, y)).unwrap();
        let mut oracle = MembershipOracle::new(&m, OracleConfig::default()).unwrap();
        assert_eq!(oracle.weak_membership(&[decoy, member], &t).unwrap(), 1);
    }

    const TWO_CYLINDER: &str = "\
parameters: mu
states: x1, x2
outputs: y1, y2
x1' = (1 + x1^2)/2
x2' = (1 - x1^2)/(1 + x1^2)
y1 = 2*x1/(mu*(1 + x1^2))
y2 = x2
";

    #[test]
    fn two_cylinder_projection_vs_wrong_scaling() {
        let m = parse_model(TWO_CYLINDER).unwrap();
        let mut t = m.table().clone();
        let mu = m.params()[0];
        let y1 = m.outputs()[0];
        let y1dot = t.derivative(y1, 1).unwrap();
        // mu^2 (y1')^2 + mu^2 y1^2 - 1 holds on trajectories; dropping the
        // mu^2 factors does not.
        let musq = var(&t, mu).pow(2).unwrap();
        let member = musq
            .mul(&var(&t, y1dot).pow(2).unwrap())
            .unwrap()
            .add(&musq.mul(&var(&t, y1).pow(2).unwrap()).unwrap())
            .unwrap()
            .sub(&int(1))
            .unwrap();
        let decoy = var(&t, y1dot)
            .pow(2)
            .unwrap()
            .add(&var(&t, y1).pow(2).unwrap())
            .unwrap()
            .sub(&int(1))
            .unwrap();
        let mut oracle = MembershipOracle::new(&m, OracleConfig::default()).unwrap();
        assert_eq!(oracle.weak_membership(&[member, decoy], &t).unwrap(), 0);
    }

    #[test]
    fn two_cylinder_linear_relation_between_outputs() {
        // mu y1' equals y2' on every trajectory, with the plus sign it
        // does not; the oracle tells them apart.
        let m = parse_model(TWO_CYLINDER).unwrap();
        let mut t = m.table().clone();
        let mu = m.params()[0];
        let y1dot = t.derivative(m.outputs()[0], 1).unwrap();
        let y2dot = t.derivative(m.outputs()[1], 1).unwrap();
        let mu_y1dot = var(&t, mu).mul(&var(&t, y1dot)).unwrap();
        let member = mu_y1dot.sub(&var(&t, y2dot)).unwrap();
        let decoy = mu_y1dot.add(&var(&t, y2dot)).unwrap();
        let mut oracle = MembershipOracle::new(&m, OracleConfig::default()).unwrap();
        assert_eq!(oracle.weak_membership(&[member, decoy], &t).unwrap(), 0);
    }

    #[test]
    fn no_member_fails_loudly() {
        let m = parse_model(TOY).unwrap();
        let mut t = m.table().clone();
        let y = m.outputs()[0];
        let ydot = t.derivative(y, 1).unwrap();
        // y' - 2y is the true relation; neither candidate here holds.
        let bad1 = var(&t, ydot).add(&var(&t, y).scale(&QField.from_i64(2))).unwrap();
        let bad2 = var(&t, ydot).sub(&var(&t, y).scale(&QField.from_i64(3))).unwrap();
        let cfg = OracleConfig { max_doublings: 6, ..OracleConfig::default() };
        let mut oracle = MembershipOracle::new(&m, cfg).unwrap();
        let err = oracle.weak_membership(&[bad1, bad2], &t).unwrap_err();
        assert!(matches!(err, Error::MaxIterationsExceeded(_)), "{err:?}");
    }

    #[test]
    fn exact_mode_agrees() {
        let m = parse_model(TOY).unwrap();
        let mut t = m.table().clone();
        let y = m.outputs()[0];
        let ydot = t.derivative(y, 1).unwrap();
        let member = var(&t, ydot).sub(&var(&t, y).scale(&QField.from_i64(2))).unwrap();
        let decoy = var(&t, ydot).add(&var(&t, y)).unwrap();
        let cfg = OracleConfig { mode: OracleMode::Exact, ..OracleConfig::default() };
        let mut oracle = MembershipOracle::new(&m, cfg).unwrap();
        assert_eq!(oracle.weak_membership(&[member, decoy], &t).unwrap(), 0);
        // Exact mode decides in one clean round.
        assert_eq!(oracle.last_transcript().iter().filter(|r| r.zeros.len() == 1).count(), 1);
    }

    #[test]
    fn recorded_shift_changes_coordinates() {
        // After the change x -> x + 1, the relation y = x^2 becomes
        // y = (x - 1)^2 in the new coordinates.
        let m = parse_model(TOY).unwrap();
        let t = m.table().clone();
        let x = m.states()[0];
        let y = m.outputs()[0];
        let shifted_member = var(&t, y)
            .sub(&var(&t, x).sub(&int(1)).unwrap().pow(2).unwrap())
            .unwrap();
        let old_member = var(&t, y).sub(&var(&t, x).pow(2).unwrap()).unwrap();
        let mut oracle = MembershipOracle::new(&m, OracleConfig::default()).unwrap();
        oracle.record_shift(VarShift { var: x, num: int(1), den: int(1) });
        assert_eq!(
            oracle.weak_membership(&[shifted_member.clone(), old_member.clone()], &t).unwrap(),
            0
        );
        // Without the shift the verdict flips.
        let mut plain = MembershipOracle::new(&m, OracleConfig::default()).unwrap();
        assert_eq!(plain.weak_membership(&[shifted_member, old_member], &t).unwrap(), 1);
    }

    #[test]
    fn planted_members_in_random_models() {
        // Random tiny linear models; the planted candidate is a polynomial
        // combination of the cleared equations and their derivatives, the
        // decoys differ from it by nonzero constants and so cannot lie in
        // the (prime, constant-free) ideal.
        for case in 0u64..50 {
            let mut rng = stream(case, "planted-model");
            let mut c = || -> i64 {
                let v = rng.gen_range(-3i64..=3);
                if v == 0 {
                    1
                } else {
                    v
                }
            };
            let text = format!(
                "states: x1, x2\noutputs: y\nx1' = {}*x1 + {}*x2\nx2' = {}*x1\ny = {}*x1 + {}*x2\n",
                c(),
                c(),
                c(),
                c(),
                c()
            );
            let m = parse_model(&text).unwrap();
            let (t, gens) = generators_to_order(&m, 1).unwrap();
            let a = gens[rng.gen_range(0..gens.len())].clone();
            let b = gens[rng.gen_range(0..gens.len())].clone();
            let x1 = m.states()[0];
            let planted = a.add(&b.mul(&var(&t, x1)).unwrap()).unwrap();
            if planted.is_zero() {
                continue;
            }
            let slot = (case % 3) as usize;
            let mut cands = vec![
                planted.add(&int(1)).unwrap(),
                planted.add(&int(2)).unwrap(),
                planted.add(&int(5)).unwrap(),
            ];
            cands[slot] = planted;
            let cfg = OracleConfig { seed: case, ..OracleConfig::default() };
            let mut oracle = MembershipOracle::new(&m, cfg).unwrap();
            let got = oracle.weak_membership(&cands, &t).unwrap();
            assert_eq!(got, slot, "case {case}");
        }
    }

    #[test]
    fn lie_derivatives_stay_members() {
        // Differentiating a member twice keeps it in the ideal; the oracle
        // confirms against an order-matched decoy.
        let m = parse_model(TOY).unwrap();
        let (mut t, gens) = generators_to_order(&m, 0).unwrap();
        let rel = gens.last().unwrap().clone(); // y - x^2
        let mut member = rel;
        for _ in 0..2 {
            for v in member.support() {
                if t.kind(v) != VarKind::Parameter {
                    t.ensure_successor(v).unwrap();
                }
            }
            member = lie_derivative(&member, &t).unwrap();
        }
        let decoy = member.add(&int(3)).unwrap();
        let mut oracle = MembershipOracle::new(&m, OracleConfig::default()).unwrap();
        assert_eq!(oracle.weak_membership(&[decoy, member], &t).unwrap(), 1);
    }
}
