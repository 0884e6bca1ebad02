//! Projection-based differential elimination.
//!
//! Elimination walks a chain of representations. Each Socoban step moves one
//! unit of derivative order from a state group to an output group: the Lie
//! derivative of the output projection becomes the new output projection once
//! resultants push the other groups' leading variables back out of it, and
//! the displaced state inherits the old output projection verbatim (it is a
//! valid profile-zero projection for that state after the move). The state
//! variable, now a leading variable, is then eliminated from every other
//! projection. `project_model` repeats the move until no output projection
//! mentions a state; at that point the output and input rows describe the
//! projection of the model ideal on their own.
//!
//! Resultants produce extraneous factors. Every resultant here is computed
//! in factored form (Sylvester line gcds first, then squarefree and
//! structural splits), the factors that cannot contain the wanted relation
//! are dropped, and an `IdealSelector` (normally the sampling membership
//! oracle) picks the factor that actually lies in the model ideal.
//!
//! `detect_and_apply_bilinear_change` implements the pre-factoring trick for
//! projections of the shape `A*x*s + B*x + C*s + D` with parameter
//! coefficients: shifting `s` by `-B/A` plants the predicted factor
//! `A*D - B*C` in the last column of later Sylvester matrices, where the
//! line-gcd extraction removes it before any determinant is expanded.

use std::cmp::Reverse;

use crate::coeff::QField;
use crate::error::{Error, Result};
use crate::model::{initial_representation, Model, Profile, ProfileEntry, Representation};
use crate::mono::Mono;
use crate::oracle::{IdealSelector, VarShift};
use crate::poly::{
    ensure_lie_ready, gcd, lie_derivative, primitive_part_wrt, resultant_factored, split_factors,
    QPoly,
};
use crate::vartable::{VarKind, VarTable};

/// Driver knobs for `project_model`.
#[derive(Clone, Debug)]
pub struct ElimConfig {
    /// Look for the bilinear projection shape after every step and shift
    /// the second state when it matches. Disabling this changes nothing but
    /// speed.
    pub varchange: bool,
    /// Pivots to play before the heuristic takes over, as (output group,
    /// state group) pairs. An entry that is not legal when its turn comes
    /// is a usage error.
    pub forced_pivots: Vec<(usize, usize)>,
    /// Cap on Socoban steps. `None` means the state count, which the theory
    /// guarantees is enough.
    pub max_steps: Option<usize>,
}

impl Default for ElimConfig {
    fn default() -> Self {
        ElimConfig { varchange: true, forced_pivots: Vec::new(), max_steps: None }
    }
}

/// A recorded change of coordinates on one state: the base variable was
/// shifted so that `new = old + shift.num/shift.den`, and `predicted` is the
/// resultant factor the shift is designed to expose as a Sylvester line gcd.
#[derive(Clone, Debug)]
pub struct BilinearChange {
    /// Group index of the shifted state.
    pub group: usize,
    pub shift: VarShift,
    pub predicted: QPoly,
}

/// Elimination in progress: the current representation plus the history
/// needed to interpret it (applied pivots and coordinate shifts).
#[derive(Clone, Debug)]
pub struct EliminationState {
    pub rep: Representation,
    pub substitutions: Vec<BilinearChange>,
    /// Applied pivots in order, as (output group, state group).
    pub pivots: Vec<(usize, usize)>,
}

impl EliminationState {
    pub fn start(m: &Model) -> Result<Self> {
        Ok(EliminationState {
            rep: initial_representation(m)?,
            substitutions: Vec::new(),
            pivots: Vec::new(),
        })
    }
}

/// Result of a full `project_model` run. The final state keeps the state
/// groups (their projections express the states through the outputs, which
/// reports want); the `io_*` accessors give the view restricted to output
/// and input groups.
#[derive(Clone, Debug)]
pub struct ModelProjection {
    pub state: EliminationState,
    pub steps: usize,
}

impl ModelProjection {
    /// Group indices of the surviving (output and input) rows.
    pub fn io_indices(&self) -> Vec<usize> {
        let rep = &self.state.rep;
        (0..rep.groups.len())
            .filter(|&i| rep.table.kind(rep.groups[i]) != VarKind::State)
            .collect()
    }

    pub fn io_profile(&self) -> Profile {
        let rep = &self.state.rep;
        Profile {
            entries: self.io_indices().iter().map(|&i| rep.profile.entries[i]).collect(),
        }
    }

    pub fn io_projections(&self) -> Vec<QPoly> {
        let rep = &self.state.rep;
        self.io_indices().iter().map(|&i| rep.projections[i].clone()).collect()
    }

    /// The output and input rows as a representation of their own,
    /// sharing the final table.
    pub fn io_representation(&self) -> Representation {
        let rep = &self.state.rep;
        Representation {
            table: rep.table.clone(),
            groups: self.io_indices().iter().map(|&i| rep.groups[i]).collect(),
            profile: self.io_profile(),
            projections: self.io_projections(),
        }
    }
}

/// Walk `h` successor links up from a base variable.
fn lead_of(table: &VarTable, base: usize, h: u32) -> Result<usize> {
    let mut v = base;
    for _ in 0..h {
        v = table
            .successor(v)
            .ok_or_else(|| Error::internal("leading variable missing from the table"))?;
    }
    Ok(v)
}

/// Eliminate `var` from `f` by a resultant against `against`, split the
/// result into factors, drop those that cannot be the wanted projection
/// (no occurrence of `target`, the leading variable the survivor must
/// carry), and let the selector pick among the rest.
fn eliminate_var<S: IdealSelector>(
    f: &QPoly,
    against: &QPoly,
    var: usize,
    target: usize,
    table: &VarTable,
    sel: &mut S,
) -> Result<QPoly> {
    let (core, extracted) = resultant_factored(f, against, var)?;
    if core.is_zero() {
        return Err(Error::internal(format!(
            "resultant in {} of two projections vanished; they were expected to be coprime",
            table.display_name(var)
        )));
    }
    let mut pool: Vec<QPoly> = Vec::new();
    for part in extracted.into_iter().chain([core]) {
        for piece in split_factors(&part)? {
            if piece.deg(target) > 0 && !pool.contains(&piece) {
                pool.push(piece);
            }
        }
    }
    if pool.is_empty() {
        return Err(Error::internal(format!(
            "no factor of the resultant involves the leading variable {}",
            table.display_name(target)
        )));
    }
    let k = sel.select(&pool, table)?;
    if k >= pool.len() {
        return Err(Error::internal("selector returned an out-of-range index"));
    }
    Ok(pool.swap_remove(k))
}

/// One elimination move: raise group `i`'s profile entry by one and drop
/// group `j`'s from one to zero, rewriting the projections to match.
///
/// Requires that projection `i` involves the base variable of group `j` and
/// that group `j` currently has profile entry one.
pub fn socoban<S: IdealSelector>(
    st: &EliminationState,
    i: usize,
    j: usize,
    sel: &mut S,
) -> Result<EliminationState> {
    let rep = &st.rep;
    let groups = &rep.groups;
    if i >= groups.len() || j >= groups.len() || i == j {
        return Err(Error::usage("pivot must name two distinct groups"));
    }
    let hi = rep.profile.entries[i]
        .finite()
        .ok_or_else(|| Error::usage("pivot target group has an infinite profile entry"))?;
    if rep.profile.entries[j] != ProfileEntry::Finite(1) {
        return Err(Error::usage(format!(
            "pivot source {} must have profile entry one",
            rep.table.base_name(groups[j])
        )));
    }
    let xj = groups[j];
    if !rep.projections[i].contains_var(xj) {
        return Err(Error::usage(format!(
            "projection of {} does not involve {}",
            rep.table.base_name(groups[i]),
            rep.table.base_name(xj)
        )));
    }

    let mut table = rep.table.clone();
    ensure_lie_ready(&rep.projections[i], &mut table)?;
    let mut f = lie_derivative(&rep.projections[i], &table)?;
    let target = lead_of(&table, groups[i], hi + 1)?;

    // The derivative picked up other groups' leading variables; resultants
    // against their projections push each one back out. A variable never
    // reappears once eliminated because projection tails stay below the
    // profile, so one pass suffices.
    for (l, &group) in groups.iter().enumerate() {
        if l == i {
            continue;
        }
        let Some(hl) = rep.profile.entries[l].finite() else { continue };
        let lead = lead_of(&table, group, hl)?;
        if !f.contains_var(lead) {
            continue;
        }
        f = eliminate_var(&f, &rep.projections[l], lead, target, &table, sel)?;
    }

    let mut projections = rep.projections.clone();
    let mut entries = rep.profile.entries.clone();

    // The old projection of group i involves x_j and otherwise only
    // variables below the updated profile, so it becomes the projection of
    // group j. Content in its x_j coefficients lives strictly below the
    // profile and cannot lie in a prime ideal with that transcendence
    // basis, so it is safe to strip without consulting the selector.
    let ftilde = primitive_part_wrt(&projections[i], xj)?.normalize_unit();
    projections[i] = f;
    entries[i] = ProfileEntry::Finite(hi + 1);
    entries[j] = ProfileEntry::Finite(0);

    // x_j is a leading variable now; eliminate it from every other
    // projection (including the one just built for group i).
    for l in 0..groups.len() {
        if l == j {
            continue;
        }
        let Some(hl) = entries[l].finite() else { continue };
        if !projections[l].contains_var(xj) {
            continue;
        }
        let lead = lead_of(&table, groups[l], hl)?;
        projections[l] = eliminate_var(&projections[l], &ftilde, xj, lead, &table, sel)?;
    }
    projections[j] = ftilde;

    let new_rep = Representation {
        table,
        groups: groups.clone(),
        profile: Profile { entries },
        projections,
    };
    new_rep.check_invariant()?;
    let mut pivots = st.pivots.clone();
    pivots.push((i, j));
    Ok(EliminationState {
        rep: new_rep,
        substitutions: st.substitutions.clone(),
        pivots,
    })
}

/// All pivots `socoban` would accept right now: output groups whose
/// projection involves the base variable of a state group with profile
/// entry one. Sorted by (output group, state group).
pub fn legal_pivots(st: &EliminationState) -> Vec<(usize, usize)> {
    let rep = &st.rep;
    let mut out = Vec::new();
    for i in 0..rep.groups.len() {
        if rep.table.kind(rep.groups[i]) != VarKind::Output {
            continue;
        }
        if rep.profile.entries[i].finite().is_none() {
            continue;
        }
        for j in 0..rep.groups.len() {
            if rep.table.kind(rep.groups[j]) != VarKind::State {
                continue;
            }
            if rep.profile.entries[j] != ProfileEntry::Finite(1) {
                continue;
            }
            if rep.projections[i].contains_var(rep.groups[j]) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Degree-based pivot heuristic. Among the legal pivots it minimizes, in
/// order: the degree of the state in the output projection (smaller
/// resultants), the output's current profile entry (keeps the output orders
/// balanced), the total-degree sum of all projections mentioning the state
/// (a proxy for how much the second elimination pass will swell), then the
/// output group descending and the state group ascending as fixed
/// tie-breaks. Returns `None` exactly when no output projection contains a
/// state variable, which is the driver's exit condition.
pub fn choose_pivot(st: &EliminationState) -> Option<(usize, usize)> {
    let rep = &st.rep;
    legal_pivots(st)
        .into_iter()
        .min_by_key(|&(i, j)| {
            let deg = rep.projections[i].deg(rep.groups[j]);
            let hi = rep.profile.entries[i].finite().unwrap_or(u32::MAX);
            let swell: u32 = rep
                .projections
                .iter()
                .filter(|p| {
                    p.support().iter().any(|&v| rep.table.base(v) == rep.groups[j])
                })
                .map(|p| p.total_degree())
                .sum();
            (deg, hi, swell, Reverse(i), j)
        })
}

/// Decompose a projection as `A*x*s + B*x + C*s + D` where `x` is the
/// group's own base variable, `s` is the base of another state, and the
/// coefficients involve parameters only. Returns `(s, A, B, C, D)`.
fn bilinear_shape(
    rep: &Representation,
    group: usize,
) -> Option<(usize, QPoly, QPoly, QPoly, QPoly)> {
    let p = &rep.projections[group];
    if p.is_zero() {
        return None;
    }
    let table = &rep.table;
    let x = rep.groups[group];
    let mut other = None;
    for v in p.support() {
        if v == x || table.kind(v) == VarKind::Parameter {
            continue;
        }
        if table.kind(v) != VarKind::State || table.order(v) != 0 {
            return None;
        }
        if other.replace(v).is_some() {
            return None;
        }
    }
    let s = other?;
    if p.deg(x) != 1 || p.deg(s) != 1 {
        return None;
    }
    let zero = || QPoly::zero(QField).with_table_id(p.table_id());
    let mut parts = [zero(), zero(), zero(), zero()];
    for (m, c) in p.terms() {
        let slot = match (m.deg(x), m.deg(s)) {
            (1, 1) => 0,
            (1, 0) => 1,
            (0, 1) => 2,
            (0, 0) => 3,
            _ => return None,
        };
        let rest = m.with_deg(x, 0).with_deg(s, 0);
        let term = QPoly::monomial(QField, rest, c.clone()).with_table_id(p.table_id());
        parts[slot] = parts[slot].add(&term).ok()?;
    }
    let [a, b, c, d] = parts;
    Some((s, a, b, c, d))
}

/// If the projection of `group` has the bilinear shape `A*x*s + B*x + C*s +
/// D` with parameter coefficients, `gcd(A*D - B*C, A) = 1`, and a nonzero
/// `B`, substitute `s -> s - B/A` across all projections (clearing
/// denominators), record the shift with the selector, and return the
/// applied change. Later resultants against this projection then carry
/// `A*D - B*C` in the last Sylvester column, where the line-gcd extraction
/// removes it before the determinant is computed. Anything else is a no-op.
pub fn detect_and_apply_bilinear_change<S: IdealSelector>(
    st: &mut EliminationState,
    group: usize,
    sel: &mut S,
) -> Result<Option<BilinearChange>> {
    let Some((s, a, b, c, d)) = bilinear_shape(&st.rep, group) else {
        return Ok(None);
    };
    if a.is_zero() || b.is_zero() {
        return Ok(None);
    }
    let predicted = a.mul(&d)?.sub(&b.mul(&c)?)?;
    if predicted.is_zero() || !gcd(&predicted, &a)?.is_constant() {
        return Ok(None);
    }
    // The root of A*s + B sits at -B/A; shifting s there means the new
    // symbol reads old value + B/A on trajectories.
    let s_var = QPoly::var(QField, s).with_table(&st.rep.table);
    let num = a.mul(&s_var)?.sub(&b)?;
    for idx in 0..st.rep.groups.len() {
        let Some(h) = st.rep.profile.entries[idx].finite() else { continue };
        if !st.rep.projections[idx].contains_var(s) {
            continue;
        }
        let lead = lead_of(&st.rep.table, st.rep.groups[idx], h)?;
        let shifted = st.rep.projections[idx].substitute_rational(s, &num, &a)?;
        st.rep.projections[idx] = primitive_part_wrt(&shifted, lead)?.normalize_unit();
    }
    st.rep.check_invariant()?;
    let shift = VarShift { var: s, num: b, den: a };
    let change = BilinearChange { group, shift: shift.clone(), predicted };
    sel.record_shift(shift);
    st.substitutions.push(change.clone());
    Ok(Some(change))
}

/// Restate an error with the driver position that produced it.
fn with_step_context(e: Error, st: &EliminationState, step: usize, i: usize, j: usize) -> Error {
    let ctx = format!(
        "Socoban step {step}, pivot ({}, {}), profile {}",
        st.rep.table.base_name(st.rep.groups[i]),
        st.rep.table.base_name(st.rep.groups[j]),
        st.rep.profile
    );
    match e {
        Error::Usage(m) => Error::Usage(format!("{m} ({ctx})")),
        Error::DenominatorVanished(m) => Error::DenominatorVanished(format!("{m} ({ctx})")),
        Error::MaxIterationsExceeded(m) => Error::MaxIterationsExceeded(format!("{m} ({ctx})")),
        Error::BudgetExceeded(m) => Error::BudgetExceeded(format!("{m} ({ctx})")),
        Error::Internal(m) => Error::Internal(format!("{m} ({ctx})")),
        other => other,
    }
}

/// Run the elimination driver to completion: apply forced pivots first,
/// then the heuristic, until no output projection contains a state
/// variable. The returned state's output and input rows describe the
/// projection of the model ideal onto output and input derivatives.
///
/// Note that the projections alone may cut out more than the model ideal's
/// component; downstream consumers keep pairing them with the membership
/// oracle for exactly that reason.
pub fn project_model<S: IdealSelector>(
    m: &Model,
    sel: &mut S,
    cfg: &ElimConfig,
) -> Result<ModelProjection> {
    let mut st = EliminationState::start(m)?;
    let cap = cfg.max_steps.unwrap_or(m.states().len());
    let mut forced = cfg.forced_pivots.iter();
    let mut steps = 0usize;
    loop {
        let next = match forced.next() {
            Some(&(i, j)) => {
                if !legal_pivots(&st).contains(&(i, j)) {
                    return Err(Error::usage(format!(
                        "forced pivot ({i}, {j}) is not legal at step {steps}"
                    )));
                }
                Some((i, j))
            }
            None => choose_pivot(&st),
        };
        let Some((i, j)) = next else { break };
        if steps >= cap {
            return Err(Error::BudgetExceeded(format!(
                "elimination with legal pivots remaining after {steps} Socoban steps (profile {})",
                st.rep.profile
            )));
        }
        st = socoban(&st, i, j, sel).map_err(|e| with_step_context(e, &st, steps, i, j))?;
        if cfg.varchange {
            detect_and_apply_bilinear_change(&mut st, j, sel)?;
        }
        steps += 1;
    }

    // Projections that never went through a resultant (untouched initial
    // rows) can still carry content below the profile; strip it the same
    // way socoban strips the swapped projection.
    for idx in 0..st.rep.groups.len() {
        let Some(h) = st.rep.profile.entries[idx].finite() else { continue };
        let lead = lead_of(&st.rep.table, st.rep.groups[idx], h)?;
        st.rep.projections[idx] =
            primitive_part_wrt(&st.rep.projections[idx], lead)?.normalize_unit();
    }
    st.rep.check_invariant()?;
    for idx in 0..st.rep.groups.len() {
        if st.rep.table.kind(st.rep.groups[idx]) == VarKind::State {
            continue;
        }
        for v in st.rep.projections[idx].support() {
            if st.rep.table.kind(v) == VarKind::State {
                return Err(Error::internal(format!(
                    "driver exited with state variable {} in the projection of {}",
                    st.rep.table.display_name(v),
                    st.rep.table.base_name(st.rep.groups[idx])
                )));
            }
        }
    }
    Ok(ModelProjection { state: st, steps })
}

/// Pseudo-remainder of `g` by `f` with respect to `v`: repeatedly cancels
/// the leading `v`-term, multiplying by `f`'s leading coefficient. The
/// result has `v`-degree below `f`'s.
fn prem(g: &QPoly, f: &QPoly, v: usize) -> Result<QPoly> {
    let df = f.deg(v);
    let lc_f = f.lc_wrt(v);
    let mut r = g.clone();
    while !r.is_zero() && r.deg(v) >= df {
        let shift = r.deg(v) - df;
        let lc_r = r.lc_wrt(v);
        let scaled = f.mul(&lc_r)?.mul_mono(&Mono::var_pow(v, shift));
        r = r.mul(&lc_f)?.sub(&scaled)?;
    }
    Ok(r)
}

/// Differential pseudo-reduction of `g` by the projections of `rep`, under
/// the ranking where a variable's height is its order minus its group's
/// profile entry (group index breaking ties). Projections form a
/// characteristic set for that ranking, so members of the saturated ideal
/// they generate reduce to zero. Prolonged projections stay linear in their
/// leader, so each round strictly lowers the top reducible variable.
pub fn diff_reduce(g: &QPoly, rep: &Representation) -> Result<QPoly> {
    let mut table = rep.table.clone();
    let mut r = g.clone();
    loop {
        if r.is_zero() {
            return Ok(r);
        }
        let mut top: Option<(i64, usize, usize)> = None;
        for v in r.support() {
            let base = table.base(v);
            let Some(gi) = rep.group_of(base) else { continue };
            let Some(h) = rep.profile.entries[gi].finite() else { continue };
            let excess = table.order(v) as i64 - h as i64;
            if excess < 0 {
                continue;
            }
            if excess == 0 && r.deg(v) < rep.projections[gi].deg(v) {
                continue;
            }
            let key = (excess, gi, v);
            if top.is_none_or(|t| (t.0, t.1) < (excess, gi)) {
                top = Some(key);
            }
        }
        let Some((excess, gi, v)) = top else { return Ok(r) };
        let mut f = rep.projections[gi].clone();
        for _ in 0..excess {
            ensure_lie_ready(&f, &mut table)?;
            f = lie_derivative(&f, &table)?;
        }
        r = prem(&r, &f, v)?;
    }
}
