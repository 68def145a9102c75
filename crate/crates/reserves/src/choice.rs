//! Single-institution selection procedures: q-responsive open selection,
//! restricted merit orders, the India reserves rule, the backward-transfers
//! rule with its termination condition, and a literal-reversion fixture.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{ApplicantId, CapacityVector, CategoryId, InstitutionId, Market};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChoiceError {
    #[error("category `{0}` is not a reserved category")]
    NotReserved(String),
}

/// One pass of a choice procedure: the seat distribution it ran under and
/// the vacancies it left in each category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceIteration {
    pub capacities: CapacityVector,
    /// Per-category unfilled seats after this pass.
    pub vacancies: Vec<u32>,
}

impl ChoiceIteration {
    /// Total vacant seats in dereservable categories (the paper's per-iteration
    /// transfer amount).
    pub fn dereservable_vacancies(&self, market: &Market) -> u32 {
        market
            .scheme
            .dereservable()
            .iter()
            .map(|&c| self.vacancies[c.0])
            .sum()
    }
}

/// Outcome of a choice rule: the tagged chosen set, the seat distribution of
/// the final pass, and the full iteration trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceResult {
    /// Chosen applicants with their category tags: open picks in merit order,
    /// then each reserved category in scheme order.
    pub chosen: Vec<(ApplicantId, CategoryId)>,
    pub final_capacities: CapacityVector,
    pub iterations: Vec<ChoiceIteration>,
}

impl ChoiceResult {
    pub fn last_iteration(&self) -> usize {
        self.iterations.len()
    }

    pub fn chosen_set(&self) -> BTreeSet<ApplicantId> {
        self.chosen.iter().map(|(i, _)| *i).collect()
    }

    pub fn contains(&self, i: ApplicantId) -> bool {
        self.chosen.iter().any(|(j, _)| *j == i)
    }

    pub fn tag_of(&self, i: ApplicantId) -> Option<CategoryId> {
        self.chosen.iter().find(|(j, _)| *j == i).map(|(_, c)| *c)
    }

    pub fn tag_count(&self, c: CategoryId) -> u32 {
        self.chosen.iter().filter(|(_, cat)| *cat == c).count() as u32
    }
}

/// The merit order restricted to declared members of reserved category `r`:
/// members keep their relative order, everyone else is unacceptable.
pub fn restricted_merit_order(
    market: &Market,
    s: InstitutionId,
    r: CategoryId,
) -> Result<Vec<ApplicantId>, ChoiceError> {
    if !market.scheme.is_reserved(r) {
        return Err(ChoiceError::NotReserved(market.scheme.name(r).to_string()));
    }
    Ok(market
        .ranked(s)
        .iter()
        .copied()
        .filter(|&i| market.applicant(i).effective_category() == Some(r))
        .collect())
}

/// q-responsive open selection: the top `k` acceptable applicants of `pool`
/// under the institution's merit order.
pub fn choose_open(
    market: &Market,
    s: InstitutionId,
    pool: &[ApplicantId],
    k: u32,
) -> Vec<ApplicantId> {
    let members: BTreeSet<ApplicantId> = pool.iter().copied().collect();
    market
        .ranked(s)
        .iter()
        .copied()
        .filter(|i| members.contains(i))
        .take(k as usize)
        .collect()
}

/// One India-reserves pass: fill open by merit, then each reserved category
/// from the remaining applicants by restricted merit. Returns the tagged
/// chosen set and per-category vacancies.
fn india_pass(
    market: &Market,
    s: InstitutionId,
    pool: &[ApplicantId],
    q: &CapacityVector,
) -> (Vec<(ApplicantId, CategoryId)>, Vec<u32>) {
    let scheme = &market.scheme;
    let open = scheme.open();
    let open_picks = choose_open(market, s, pool, q.get(open));
    let mut chosen: Vec<(ApplicantId, CategoryId)> =
        open_picks.iter().map(|&i| (i, open)).collect();
    let taken: BTreeSet<ApplicantId> = open_picks.into_iter().collect();
    let mut vacancies = vec![0u32; scheme.len()];
    vacancies[open.0] = q.get(open) - taken.len() as u32;
    let pool_set: BTreeSet<ApplicantId> = pool.iter().copied().collect();
    for &r in scheme.reserved() {
        let picks: Vec<ApplicantId> = market
            .ranked(s)
            .iter()
            .copied()
            .filter(|i| {
                pool_set.contains(i)
                    && !taken.contains(i)
                    && market.applicant(*i).effective_category() == Some(r)
            })
            .take(q.get(r) as usize)
            .collect();
        vacancies[r.0] = q.get(r) - picks.len() as u32;
        chosen.extend(picks.into_iter().map(|i| (i, r)));
    }
    (chosen, vacancies)
}

/// India Reserves choice rule: a single pass with no de-reservation.
pub fn choose_india(
    market: &Market,
    s: InstitutionId,
    pool: &[ApplicantId],
    q: &CapacityVector,
) -> ChoiceResult {
    let (chosen, vacancies) = india_pass(market, s, pool, q);
    ChoiceResult {
        chosen,
        final_capacities: q.clone(),
        iterations: vec![ChoiceIteration {
            capacities: q.clone(),
            vacancies,
        }],
    }
}

/// Backward Transfers choice rule: repeat India passes, transferring each
/// pass's vacant dereservable seats to open, until no dereservable vacancy
/// remains. The chosen set is the final pass's chosen set.
pub fn choose_backward_transfers(
    market: &Market,
    s: InstitutionId,
    pool: &[ApplicantId],
    q: &CapacityVector,
) -> ChoiceResult {
    let scheme = &market.scheme;
    let mut current = q.clone();
    let mut iterations = Vec::new();
    loop {
        let (chosen, vacancies) = india_pass(market, s, pool, &current);
        let transfers: Vec<(CategoryId, u32)> = scheme
            .dereservable()
            .iter()
            .map(|&c| (c, vacancies[c.0]))
            .filter(|&(_, n)| n > 0)
            .collect();
        iterations.push(ChoiceIteration {
            capacities: current.clone(),
            vacancies,
        });
        if transfers.is_empty() {
            return ChoiceResult {
                chosen,
                final_capacities: current,
                iterations,
            };
        }
        current = current.transfer_to_open(scheme, &transfers);
    }
}

/// Termination test for the backward-transfers iteration: `q_candidate` is
/// the distribution of a final pass iff the open seats it adds beyond the
/// initial open picks absorb exactly `tau1` non-dereservable applicants, or
/// every dereservable seat has been transferred.
pub fn bt_termination_check(
    market: &Market,
    s: InstitutionId,
    pool: &[ApplicantId],
    q_initial: &CapacityVector,
    q_candidate: &CapacityVector,
    tau1: u32,
) -> bool {
    let scheme = &market.scheme;
    let open = scheme.open();
    let dereservable_total: u32 = scheme
        .dereservable()
        .iter()
        .map(|&c| q_initial.get(c))
        .sum();
    if q_candidate.get(open) == q_initial.get(open) + dereservable_total {
        return true;
    }
    let initial_picks: BTreeSet<ApplicantId> =
        choose_open(market, s, pool, q_initial.get(open))
            .into_iter()
            .collect();
    let candidate_picks = choose_open(market, s, pool, q_candidate.get(open));
    let new_non_dereservable = candidate_picks
        .iter()
        .filter(|&&i| {
            !initial_picks.contains(&i)
                && !market
                    .applicant(i)
                    .effective_category()
                    .is_some_and(|c| scheme.is_dereservable(c))
        })
        .count() as u32;
    new_non_dereservable == tau1
}

/// Literal reading of the 2008 reversion decree, kept as a test fixture:
/// run one India pass, then hand each vacant dereservable seat to the best
/// remaining general-category applicant as an open position.
pub fn choose_thakur_literal(
    market: &Market,
    s: InstitutionId,
    pool: &[ApplicantId],
    q: &CapacityVector,
) -> ChoiceResult {
    let scheme = &market.scheme;
    let (mut chosen, vacancies) = india_pass(market, s, pool, q);
    let reverted: u32 = scheme
        .dereservable()
        .iter()
        .map(|&c| vacancies[c.0])
        .sum();
    let taken: BTreeSet<ApplicantId> = chosen.iter().map(|(i, _)| *i).collect();
    let pool_set: BTreeSet<ApplicantId> = pool.iter().copied().collect();
    let awarded: Vec<ApplicantId> = market
        .ranked(s)
        .iter()
        .copied()
        .filter(|i| {
            pool_set.contains(i)
                && !taken.contains(i)
                && market.applicant(*i).effective_category().is_none()
        })
        .take(reverted as usize)
        .collect();
    let transfers: Vec<(CategoryId, u32)> = scheme
        .dereservable()
        .iter()
        .map(|&c| (c, vacancies[c.0]))
        .filter(|&(_, n)| n > 0)
        .collect();
    let final_capacities = q.transfer_to_open(scheme, &transfers);
    chosen.extend(awarded.into_iter().map(|i| (i, scheme.open())));
    ChoiceResult {
        chosen,
        final_capacities,
        iterations: vec![ChoiceIteration {
            capacities: q.clone(),
            vacancies,
        }],
    }
}

/// The selection procedures an institution can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChoiceRule {
    India,
    BackwardTransfers,
    ThakurLiteral,
}

impl ChoiceRule {
    pub fn choose(
        self,
        market: &Market,
        s: InstitutionId,
        pool: &[ApplicantId],
        q: &CapacityVector,
    ) -> ChoiceResult {
        match self {
            ChoiceRule::India => choose_india(market, s, pool, q),
            ChoiceRule::BackwardTransfers => choose_backward_transfers(market, s, pool, q),
            ChoiceRule::ThakurLiteral => choose_thakur_literal(market, s, pool, q),
        }
    }

    /// Whether the chosen set is evaluated against the final (post-transfer)
    /// distribution or the initial one when auditing choice-level axioms.
    pub fn audits_against_final(self) -> bool {
        matches!(self, ChoiceRule::BackwardTransfers)
    }
}

/// A choice procedure viewed as a black box, for oracles and property checks
/// that must not depend on rule internals.
pub trait ChoiceFn {
    fn choose(
        &self,
        market: &Market,
        s: InstitutionId,
        pool: &[ApplicantId],
        q: &CapacityVector,
    ) -> ChoiceResult;
}

impl ChoiceFn for ChoiceRule {
    fn choose(
        &self,
        market: &Market,
        s: InstitutionId,
        pool: &[ApplicantId],
        q: &CapacityVector,
    ) -> ChoiceResult {
        ChoiceRule::choose(*self, market, s, pool, q)
    }
}

impl<F> ChoiceFn for F
where
    F: Fn(&Market, InstitutionId, &[ApplicantId], &CapacityVector) -> ChoiceResult,
{
    fn choose(
        &self,
        market: &Market,
        s: InstitutionId,
        pool: &[ApplicantId],
        q: &CapacityVector,
    ) -> ChoiceResult {
        self(market, s, pool, q)
    }
}
