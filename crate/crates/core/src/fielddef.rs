//! Field of definition of the projected ideal.
//!
//! Reading generators off the projection coefficients alone can miss part
//! of the field: each projection constrains one group, so a relation that
//! couples two groups contributes coefficient ratios no single projection
//! shows. The repair is one extra polynomial. A marker variable z is
//! pinned to a random positive combination of the leading variables, the
//! finite-profile projections are folded into a single resultant in z,
//! and the selector picks the factor that vanishes on model solutions.
//! Once `unique_top_dim_component` certifies that the pick cuts a single
//! top-dimensional component, the coefficient ratios of the projections
//! together with those of the extra polynomial generate the field, and
//! membership questions against it reduce to `field_membership`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::algeo::{field_membership_with, unique_top_dim_component, MembershipOptions};
use crate::coeff::QField;
use crate::error::{Error, Result};
use crate::model::{ProfileEntry, Representation};
use crate::mono::Mono;
use crate::oracle::IdealSelector;
use crate::poly::{content_wrt, gcd, resultant, split_factors, QPoly};
use crate::ratfun::RatFun;
use crate::vartable::{VarKind, VarTable};

/// Which polynomial a generator batch was read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorSource {
    /// The projection at this group position of the representation.
    Projection(usize),
    /// The extra polynomial built by the resultant fold.
    Extra,
}

/// Coefficients of the defining polynomials as rational functions in the
/// parameters, each source scaled so its senior coefficient is one.
///
/// The field the entries generate does not depend on which coefficient
/// plays the unit: ratios against any fixed nonzero coefficient of the
/// same source generate the same field, because the two choices differ by
/// a factor the field already contains. The senior coefficient (the one
/// on the largest monomial in the non-parameter variables) is used since
/// it is a stable pick.
#[derive(Clone, Debug)]
pub struct FieldGenerators {
    pub entries: Vec<(GeneratorSource, RatFun)>,
}

impl FieldGenerators {
    /// The generators without their source tags.
    pub fn functions(&self) -> impl Iterator<Item = &RatFun> + '_ {
        self.entries.iter().map(|(_, f)| f)
    }

    /// Rewrite the generators and a query over one common denominator, as
    /// (query numerator, generator numerators, shared denominator). This
    /// is the shape `field_membership` consumes.
    pub fn with_common_denominator(&self, query: &RatFun) -> Result<(QPoly, Vec<QPoly>, QPoly)> {
        let mut den = query.den().clone();
        for f in self.functions() {
            let g = gcd(&den, f.den())?;
            den = den.mul(&f.den().exact_div(&g)?.expect("gcd divides"))?;
        }
        let fq = query.num().mul(&den.exact_div(query.den())?.expect("common denominator"))?;
        let mut f_list = Vec::with_capacity(self.entries.len());
        for f in self.functions() {
            f_list.push(f.num().mul(&den.exact_div(f.den())?.expect("common denominator"))?);
        }
        Ok((fq, f_list, den))
    }

    /// Whether `query` lies in the field the entries generate, under the
    /// probabilistic contract of `field_membership` at confidence `prob`.
    pub fn contains(&self, query: &RatFun, prob: f64, rng: &mut ChaCha20Rng) -> Result<bool> {
        self.contains_with(query, prob, rng, &MembershipOptions::default())
    }

    pub fn contains_with(
        &self,
        query: &RatFun,
        prob: f64,
        rng: &mut ChaCha20Rng,
        opts: &MembershipOptions,
    ) -> Result<bool> {
        let (f, f_list, g) = self.with_common_denominator(query)?;
        field_membership_with(&f, &f_list, &g, prob, rng, opts)
    }
}

/// Driver knobs for `compute_field_of_definition`.
#[derive(Clone, Debug)]
pub struct FieldDefConfig {
    /// Fold the projections in ascending leader-degree order instead of
    /// group order. The final resultant is the same either way; taking
    /// low degrees first keeps the intermediates smaller on some models.
    pub fold_by_degree: bool,
    /// Bound doublings after the initial round before giving up.
    pub max_doublings: u32,
}

impl Default for FieldDefConfig {
    fn default() -> Self {
        FieldDefConfig { fold_by_degree: false, max_doublings: 16 }
    }
}

/// Extra polynomial and coefficient generators for the field over which
/// the representation's ideal is defined.
///
/// Each round pins a marker variable z to `sum a_i * (leader of group i)`
/// with fresh shifts `a_i` drawn from `[1, N]`, folds the finite-profile
/// projections into one resultant by eliminating their leading variables
/// in turn, splits the result, substitutes the combination back for z,
/// and lets the selector pick the factor lying in the model ideal. The
/// pick is certified by `unique_top_dim_component` at the same bound N;
/// an uncertified round doubles N, and exhausting the doubling budget is
/// a hard `MaxIterationsExceeded`.
///
/// Shifts are drawn one per finite group in group order before the fold
/// starts, and the component test draws only after that, so equal seeds
/// replay identical runs. The selector's failure modes (ambiguity,
/// budget) propagate unchanged.
pub fn compute_field_of_definition<S: IdealSelector>(
    rep: &Representation,
    sel: &mut S,
    rng: &mut ChaCha20Rng,
    cfg: &FieldDefConfig,
) -> Result<(QPoly, FieldGenerators)> {
    rep.check_invariant()?;
    let mut finite: Vec<(usize, usize)> = Vec::new();
    for (i, e) in rep.profile.entries.iter().enumerate() {
        if e.finite().is_some() {
            let lead = rep
                .leading_var(i)
                .ok_or_else(|| Error::internal("leading variable missing from table"))?;
            finite.push((i, lead));
        }
    }
    if finite.is_empty() {
        return Err(Error::usage("field of definition needs a finite-profile group"));
    }
    let caps = order_caps(rep);

    // The marker lives in a widened copy of the table. Clones keep the
    // table identity, so polynomials stay compatible across the two.
    let mut table = rep.table.clone();
    let mut marker = String::from("z");
    while table.lookup(&marker, 0).is_some() {
        marker.push('_');
    }
    let z = table.add(&marker, VarKind::Parameter)?;
    let zp = QPoly::var(QField, z).with_table(&table);

    let q_list: Vec<QPoly> = finite.iter().map(|&(i, _)| rep.projections[i].clone()).collect();
    let y_vars: Vec<usize> = finite.iter().map(|&(_, l)| l).collect();
    let mut fold: Vec<usize> = (0..finite.len()).collect();
    if cfg.fold_by_degree {
        fold.sort_by_key(|&j| q_list[j].deg(y_vars[j]));
    }

    let mut n_bound: u64 = 1;
    for _ in 0..=cfg.max_doublings {
        let combo = draw_combination(&y_vars, n_bound, rng, &table)?;
        let mut f = zp.sub(&combo)?;
        for &j in &fold {
            // The leader enters through the combination with a nonzero
            // shift, so it cannot have dropped out of f before its turn.
            if f.deg(y_vars[j]) == 0 {
                return Err(Error::internal("resultant fold lost a leading variable"));
            }
            f = resultant(&f, &q_list[j], y_vars[j])?;
            // Marker-free content is never part of the wanted relation
            // (the non-leading variables carry no relations of their
            // own), and left in place it could zero a later resultant.
            let c = content_wrt(&f, z)?;
            if !c.is_constant() {
                f = f.exact_div(&c)?.expect("content divides");
            }
            f = f.primitive_scalar();
            if f.deg(z) == 0 {
                return Err(Error::internal("resultant fold lost the marker variable"));
            }
        }
        let mut candidates = Vec::new();
        for piece in split_factors(&f)? {
            if piece.deg(z) == 0 {
                continue;
            }
            candidates.push(canon(piece.substitute(z, &combo)?));
        }
        if candidates.is_empty() {
            return Err(Error::internal("resultant fold produced no factor with the marker"));
        }
        let pick = sel.select(&candidates, &table)?;
        let extra = candidates[pick].clone();
        check_order_caps(rep, &caps, &extra)?;
        if unique_top_dim_component(&q_list, &y_vars, &extra, n_bound, rng)? {
            let gens = collect_generators(rep, &finite, &extra)?;
            return Ok((extra, gens));
        }
        n_bound = n_bound.saturating_mul(2);
    }
    Err(Error::MaxIterationsExceeded("field-of-definition sampling".into()))
}

/// z's pinned value: one fresh positive shift per leading variable.
fn draw_combination(
    y_vars: &[usize],
    n_bound: u64,
    rng: &mut ChaCha20Rng,
    table: &VarTable,
) -> Result<QPoly> {
    let mut acc = QPoly::zero(QField).with_table(table);
    for &v in y_vars {
        let a = rng.gen_range(1..=n_bound);
        let c = BigRational::from_integer(BigInt::from(a));
        acc = acc.add(&QPoly::monomial(QField, Mono::var(v), c).with_table(table))?;
    }
    Ok(acc)
}

/// Integer-primitive scaling with a positive senior coefficient.
fn canon(p: QPoly) -> QPoly {
    let p = p.primitive_scalar();
    match p.leading() {
        Some((_, c)) if c.is_negative() => p.neg(),
        _ => p,
    }
}

/// Highest derivative order the extra polynomial may use per group: the
/// profile entry where finite, otherwise the largest order under which
/// the group already appears in a projection.
fn order_caps(rep: &Representation) -> Vec<u32> {
    rep.profile
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| match e {
            ProfileEntry::Finite(h) => *h,
            ProfileEntry::Infinite => rep
                .projections
                .iter()
                .flat_map(|p| p.support())
                .filter(|&v| rep.table.base(v) == rep.groups[i])
                .map(|v| rep.table.order(v))
                .max()
                .unwrap_or(0),
        })
        .collect()
}

/// The fold only ever lowers derivative orders, so a selected factor
/// outside the caps means the cascade went wrong somewhere.
fn check_order_caps(rep: &Representation, caps: &[u32], extra: &QPoly) -> Result<()> {
    for v in extra.support() {
        if rep.table.kind(v) == VarKind::Parameter {
            continue;
        }
        let g = rep
            .group_of(rep.table.base(v))
            .ok_or_else(|| Error::internal("extra polynomial leaves the known groups"))?;
        if rep.table.order(v) > caps[g] {
            return Err(Error::internal(format!(
                "extra polynomial exceeds the order bound of {}",
                rep.table.base_name(rep.groups[g])
            )));
        }
    }
    Ok(())
}

fn collect_generators(
    rep: &Representation,
    finite: &[(usize, usize)],
    extra: &QPoly,
) -> Result<FieldGenerators> {
    let mut entries = Vec::new();
    for &(i, _) in finite {
        for f in normalized_coefficients(&rep.projections[i], &rep.table)? {
            entries.push((GeneratorSource::Projection(i), f));
        }
    }
    for f in normalized_coefficients(extra, &rep.table)? {
        entries.push((GeneratorSource::Extra, f));
    }
    Ok(FieldGenerators { entries })
}

/// Split `p` by its monomials in the non-parameter variables and return
/// every parameter-polynomial coefficient divided by the senior one.
fn normalized_coefficients(p: &QPoly, table: &VarTable) -> Result<Vec<RatFun>> {
    let mut by_mono: BTreeMap<Mono, QPoly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let exps = m.exponents();
        let mut xs = vec![0u32; exps.len()];
        let mut ps = vec![0u32; exps.len()];
        for (v, &e) in exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if table.kind(v) == VarKind::Parameter {
                ps[v] = e;
            } else {
                xs[v] = e;
            }
        }
        let part = QPoly::monomial(QField, Mono::from_exponents(ps), c.clone())
            .with_table_id(p.table_id());
        let key = Mono::from_exponents(xs);
        let acc = match by_mono.remove(&key) {
            Some(prev) => prev.add(&part)?,
            None => part,
        };
        by_mono.insert(key, acc);
    }
    let norm = match by_mono.iter().next_back() {
        Some((_, c)) => c.clone(),
        None => return Ok(Vec::new()),
    };
    by_mono.into_values().map(|c| RatFun::new(c, norm.clone())).collect()
}
