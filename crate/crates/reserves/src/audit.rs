//! Checkers for the assignment-level axioms (individual rationality,
//! meritocracy, non-wastefulness, open-first), the choice-level axioms
//! (over-and-above, within-category fairness, quota-filling), and stability
//! against backward-transfers choice rules.

use std::collections::BTreeSet;

use crate::choice::{choose_backward_transfers, ChoiceFn, ChoiceResult, ChoiceRule};
use crate::model::{
    ApplicantId, Assignment, CapacityVector, CategoryId, InstitutionId, Market,
};

/// Identifier of an auditable axiom or property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axiom {
    IndividualRationality,
    Meritocracy,
    NonWastefulness,
    OpenFirst,
    Stability,
    OverAndAbove,
    WithinCategoryFairness,
    QuotaFilling,
    SpiritOfAffirmativeAction,
    Substitutability,
    SizeMonotonicity,
    Improvement,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::IndividualRationality => "individual-rationality",
            Axiom::Meritocracy => "meritocracy",
            Axiom::NonWastefulness => "non-wastefulness",
            Axiom::OpenFirst => "open-first",
            Axiom::Stability => "stability",
            Axiom::OverAndAbove => "over-and-above",
            Axiom::WithinCategoryFairness => "within-category-fairness",
            Axiom::QuotaFilling => "quota-filling",
            Axiom::SpiritOfAffirmativeAction => "spirit-of-affirmative-action",
            Axiom::Substitutability => "substitutability",
            Axiom::SizeMonotonicity => "size-monotonicity",
            Axiom::Improvement => "improvement",
        }
    }
}

/// A re-checkable fact witnessing an axiom violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Applicant assigned to an institution they did not list.
    Unacceptable {
        applicant: ApplicantId,
        institution: InstitutionId,
    },
    /// `holder` keeps a seat `applicant` is eligible for despite lower merit.
    MeritViolation {
        applicant: ApplicantId,
        institution: InstitutionId,
        category: CategoryId,
        holder: ApplicantId,
    },
    /// An envied institution left seats the applicant is eligible for unfilled.
    Waste {
        applicant: ApplicantId,
        institution: InstitutionId,
        category: Option<CategoryId>,
        filled: u32,
        quota: u32,
    },
    /// Open-plus-dereservable tag count differs from the required size.
    OpenPoolSize {
        institution: InstitutionId,
        counted: u32,
        expected: u32,
    },
    /// An open-tag holder ranks below a reserved-tag holder.
    OpenBelowReserved {
        institution: InstitutionId,
        open_holder: ApplicantId,
        reserved_holder: ApplicantId,
    },
    /// Open tags do not maximally fill open seats plus reverted vacancies.
    OpenTagsNotMaximal {
        institution: InstitutionId,
        open_tags: u32,
        expected: u32,
    },
    /// Applicant prefers the institution and would be chosen alongside its members.
    BlockingPair {
        applicant: ApplicantId,
        institution: InstitutionId,
    },
    /// The institution's choice rule would not re-select its own members.
    NotRechosen {
        institution: InstitutionId,
        dropped: Vec<ApplicantId>,
    },
    /// An applicant within the open quota by rank was not given an open tag.
    RankWithinOpenQuota {
        applicant: ApplicantId,
        rank: u32,
        quota: u32,
    },
    /// Same category, higher merit, yet rejected while the other is chosen.
    UnfairWithinCategory {
        rejected: ApplicantId,
        chosen: ApplicantId,
    },
    /// A category member is rejected while the category has empty seats.
    QuotaNotFilled {
        applicant: ApplicantId,
        category: CategoryId,
        filled: u32,
        quota: u32,
    },
    /// Declaring membership got the applicant rejected where hiding would not.
    SpiritViolation {
        applicant: ApplicantId,
        pool: Vec<ApplicantId>,
    },
    /// Rejected applicant becomes chosen after an unrelated arrival.
    SubstitutabilityViolation {
        applicant: ApplicantId,
        newcomer: ApplicantId,
        pool: Vec<ApplicantId>,
    },
    /// Chosen-set size shrank when the pool grew.
    SizeMonotonicityViolation {
        newcomer: ApplicantId,
        pool: Vec<ApplicantId>,
        before: u32,
        after: u32,
    },
    /// Reporting dropped the applicant from a set hiding kept them in.
    ImprovementDropped {
        applicant: ApplicantId,
        pool: Vec<ApplicantId>,
    },
    /// The applicant is chosen under neither flag yet the chosen sets differ.
    ImprovementSideEffect {
        applicant: ApplicantId,
        pool: Vec<ApplicantId>,
    },
}

impl Witness {
    pub fn render(&self, market: &Market) -> String {
        let app = |i: &ApplicantId| market.applicant(*i).id.clone();
        let inst = |s: &InstitutionId| market.institution(*s).id.clone();
        let pool_names = |pool: &[ApplicantId]| {
            pool.iter().map(|i| app(i)).collect::<Vec<_>>().join(",")
        };
        match self {
            Witness::Unacceptable {
                applicant,
                institution,
            } => format!(
                "{} is assigned to {} but did not list it",
                app(applicant),
                inst(institution)
            ),
            Witness::MeritViolation {
                applicant,
                institution,
                category,
                holder,
            } => format!(
                "{} prefers {} where {} holds a {} position despite lower merit",
                app(applicant),
                inst(institution),
                app(holder),
                market.scheme.name(*category)
            ),
            Witness::Waste {
                applicant,
                institution,
                category,
                filled,
                quota,
            } => match category {
                Some(c) => format!(
                    "{} prefers {} where {} of {} {} positions are filled",
                    app(applicant),
                    inst(institution),
                    filled,
                    quota,
                    market.scheme.name(*c)
                ),
                None => format!(
                    "{} prefers {} where only {} of {} open-pool positions are filled",
                    app(applicant),
                    inst(institution),
                    filled,
                    quota
                ),
            },
            Witness::OpenPoolSize {
                institution,
                counted,
                expected,
            } => format!(
                "{} holds {} open-pool tags, expected {}",
                inst(institution),
                counted,
                expected
            ),
            Witness::OpenBelowReserved {
                institution,
                open_holder,
                reserved_holder,
            } => format!(
                "at {}, open holder {} ranks below reserved holder {}",
                inst(institution),
                app(open_holder),
                app(reserved_holder)
            ),
            Witness::OpenTagsNotMaximal {
                institution,
                open_tags,
                expected,
            } => format!(
                "{} uses {} open tags but open seats plus reverted vacancies allow {}",
                inst(institution),
                open_tags,
                expected
            ),
            Witness::BlockingPair {
                applicant,
                institution,
            } => format!(
                "{} prefers {} and would be chosen there",
                app(applicant),
                inst(institution)
            ),
            Witness::NotRechosen {
                institution,
                dropped,
            } => format!(
                "{} would not re-select {}",
                inst(institution),
                pool_names(dropped)
            ),
            Witness::RankWithinOpenQuota {
                applicant,
                rank,
                quota,
            } => format!(
                "{} ranks {} within the open quota {} but holds no open position",
                app(applicant),
                rank,
                quota
            ),
            Witness::UnfairWithinCategory { rejected, chosen } => format!(
                "{} outranks {} in the same category yet only the latter is chosen",
                app(rejected),
                app(chosen)
            ),
            Witness::QuotaNotFilled {
                applicant,
                category,
                filled,
                quota,
            } => format!(
                "{} is rejected while {} holds {} of {} seats",
                app(applicant),
                market.scheme.name(*category),
                filled,
                quota
            ),
            Witness::SpiritViolation { applicant, pool } => format!(
                "{} is rejected from {{{}}} when declaring membership but chosen when hiding it",
                app(applicant),
                pool_names(pool)
            ),
            Witness::SubstitutabilityViolation {
                applicant,
                newcomer,
                pool,
            } => format!(
                "{} is rejected from {{{}}} but chosen once {} joins",
                app(applicant),
                pool_names(pool),
                app(newcomer)
            ),
            Witness::SizeMonotonicityViolation {
                newcomer,
                pool,
                before,
                after,
            } => format!(
                "adding {} to {{{}}} shrank the chosen set from {} to {}",
                app(newcomer),
                pool_names(pool),
                before,
                after
            ),
            Witness::ImprovementDropped { applicant, pool } => format!(
                "{} is chosen from {{{}}} when hiding but dropped when reporting",
                app(applicant),
                pool_names(pool)
            ),
            Witness::ImprovementSideEffect { applicant, pool } => format!(
                "{} is chosen under neither flag yet the chosen sets from {{{}}} differ",
                app(applicant),
                pool_names(pool)
            ),
        }
    }
}

/// Verdict on one axiom: passes iff no witnesses were found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub axiom: Axiom,
    pub witnesses: Vec<Witness>,
}

impl AuditReport {
    pub fn new(axiom: Axiom) -> Self {
        AuditReport {
            axiom,
            witnesses: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.witnesses.is_empty()
    }
}

/// Every assigned applicant must find their institution acceptable.
pub fn check_individual_rationality(market: &Market, a: &Assignment) -> AuditReport {
    let mut report = AuditReport::new(Axiom::IndividualRationality);
    for i in market.applicant_ids() {
        if let Some((s, _)) = a.of(i) {
            if !market.preferences[i.0].contains(&s) {
                report.witnesses.push(Witness::Unacceptable {
                    applicant: i,
                    institution: s,
                });
            }
        }
    }
    report
}

/// Envied seats the applicant is eligible for (open tags for everyone, own
/// declared category tags for reserve members) must be held by higher merit.
pub fn check_meritocracy(market: &Market, a: &Assignment) -> AuditReport {
    let mut report = AuditReport::new(Axiom::Meritocracy);
    let open = market.scheme.open();
    for i in market.applicant_ids() {
        let own = market.applicant(i).effective_category();
        for s in market.preferred_to(i, a.institution_of(i)) {
            for (j, c) in a.at_institution(s) {
                let relevant = c == open || (own == Some(c) && market.scheme.is_reserved(c));
                if relevant && !market.outranks(s, j, i) {
                    report.witnesses.push(Witness::MeritViolation {
                        applicant: i,
                        institution: s,
                        category: c,
                        holder: j,
                    });
                }
            }
        }
    }
    report
}

fn open_pool_count(market: &Market, held: &[(ApplicantId, CategoryId)]) -> u32 {
    held.iter()
        .filter(|(_, c)| *c == market.scheme.open() || market.scheme.is_dereservable(*c))
        .count() as u32
}

fn open_pool_quota(market: &Market, q: &CapacityVector) -> u32 {
    q.get(market.scheme.open())
        + market
            .scheme
            .dereservable()
            .iter()
            .map(|&d| q.get(d))
            .sum::<u32>()
}

/// Every envied institution must have exhausted all positions the envier is
/// eligible for: their own declared category, and the combined pool of open
/// plus dereservable positions.
pub fn check_non_wastefulness(market: &Market, a: &Assignment) -> AuditReport {
    let mut report = AuditReport::new(Axiom::NonWastefulness);
    for i in market.applicant_ids() {
        let own = market.applicant(i).effective_category();
        for s in market.preferred_to(i, a.institution_of(i)) {
            let held = a.at_institution(s);
            let q = &market.institution(s).capacities;
            if let Some(r) = own {
                let filled = held.iter().filter(|(_, c)| *c == r).count() as u32;
                if filled != q.get(r) {
                    report.witnesses.push(Witness::Waste {
                        applicant: i,
                        institution: s,
                        category: Some(r),
                        filled,
                        quota: q.get(r),
                    });
                }
            }
            let pool_filled = open_pool_count(market, &held);
            let pool_quota = open_pool_quota(market, q);
            if pool_filled != pool_quota {
                report.witnesses.push(Witness::Waste {
                    applicant: i,
                    institution: s,
                    category: None,
                    filled: pool_filled,
                    quota: pool_quota,
                });
            }
        }
    }
    report
}

/// Open seats come first. Three clauses per institution: (i) open plus
/// dereservable tags fill the combined pool to capacity or exhaustion;
/// (ii) every open-tag holder outranks every reserved-tag holder;
/// (iii) open tags maximally fill the open seats, counting every vacant
/// dereservable seat as reverted to open.
pub fn check_open_first(market: &Market, a: &Assignment) -> AuditReport {
    let mut report = AuditReport::new(Axiom::OpenFirst);
    let scheme = &market.scheme;
    let open = scheme.open();
    for s in market.institution_ids() {
        let held = a.at_institution(s);
        let q = &market.institution(s).capacities;
        let counted = open_pool_count(market, &held);
        let expected = (held.len() as u32).min(open_pool_quota(market, q));
        if counted != expected {
            report.witnesses.push(Witness::OpenPoolSize {
                institution: s,
                counted,
                expected,
            });
        }
        for &(i, ci) in &held {
            if ci != open {
                continue;
            }
            for &(j, cj) in &held {
                if scheme.is_reserved(cj) && !market.outranks(s, i, j) {
                    report.witnesses.push(Witness::OpenBelowReserved {
                        institution: s,
                        open_holder: i,
                        reserved_holder: j,
                    });
                }
            }
        }
        let open_tags = held.iter().filter(|(_, c)| *c == open).count() as u32;
        let reverted: u32 = scheme
            .dereservable()
            .iter()
            .map(|&d| q.get(d) - (held.iter().filter(|(_, c)| *c == d).count() as u32).min(q.get(d)))
            .sum();
        let effective_open = q.get(open) + reverted;
        let max_open = (held.len() as u32).min(effective_open);
        if open_tags != max_open {
            report.witnesses.push(Witness::OpenTagsNotMaximal {
                institution: s,
                open_tags,
                expected: max_open,
            });
        }
    }
    report
}

/// Stability of an assignment against the backward-transfers choice rules:
/// institutions re-select exactly their members, and no applicant both
/// prefers an institution and would be chosen alongside its members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityReport {
    pub blocking: Vec<(ApplicantId, InstitutionId)>,
    pub not_rechosen: Vec<Witness>,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.blocking.is_empty() && self.not_rechosen.is_empty()
    }

    pub fn to_audit_report(&self) -> AuditReport {
        let mut report = AuditReport::new(Axiom::Stability);
        report.witnesses.extend(self.not_rechosen.iter().cloned());
        report
            .witnesses
            .extend(self.blocking.iter().map(|&(applicant, institution)| {
                Witness::BlockingPair {
                    applicant,
                    institution,
                }
            }));
        report
    }
}

/// Find all blocking pairs of `a` with respect to the backward-transfers
/// choice rules at initial capacities, and verify each institution would
/// re-select exactly its matched set.
pub fn find_blocking_pairs(market: &Market, a: &Assignment) -> StabilityReport {
    let mut blocking = Vec::new();
    let mut not_rechosen = Vec::new();
    for s in market.institution_ids() {
        let members: Vec<ApplicantId> = a
            .at_institution(s)
            .iter()
            .map(|(i, _)| *i)
            .collect();
        let q = &market.institution(s).capacities;
        let rechosen = choose_backward_transfers(market, s, &members, q).chosen_set();
        let member_set: BTreeSet<ApplicantId> = members.iter().copied().collect();
        if rechosen != member_set {
            let dropped: Vec<ApplicantId> =
                member_set.difference(&rechosen).copied().collect();
            not_rechosen.push(Witness::NotRechosen {
                institution: s,
                dropped,
            });
        }
        for i in market.applicant_ids() {
            if member_set.contains(&i) {
                continue;
            }
            if !market.strictly_prefers(i, Some(s), a.institution_of(i)) {
                continue;
            }
            let mut pool = members.clone();
            pool.push(i);
            pool.sort_unstable();
            if choose_backward_transfers(market, s, &pool, q).contains(i) {
                blocking.push((i, s));
            }
        }
    }
    StabilityReport {
        blocking,
        not_rechosen,
    }
}

/// Per-axiom verdicts for a single choice-rule invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceAxioms {
    pub over_and_above: AuditReport,
    pub within_category_fairness: AuditReport,
    pub quota_filling: AuditReport,
}

impl ChoiceAxioms {
    pub fn all_passed(&self) -> bool {
        self.over_and_above.passed()
            && self.within_category_fairness.passed()
            && self.quota_filling.passed()
    }

    pub fn reports(&self) -> [&AuditReport; 3] {
        [
            &self.over_and_above,
            &self.within_category_fairness,
            &self.quota_filling,
        ]
    }
}

/// Evaluate over-and-above, within-category fairness, and quota-filling for
/// one rule invocation. Quotas are read from the final distribution for the
/// backward-transfers rule (reserved positions are what remains after the
/// transfers) and from the initial one otherwise.
pub fn check_choice_axioms(
    market: &Market,
    s: InstitutionId,
    rule: ChoiceRule,
    pool: &[ApplicantId],
    q: &CapacityVector,
) -> ChoiceAxioms {
    let result = rule.choose(market, s, pool, q);
    let eval_q = if rule.audits_against_final() {
        result.final_capacities.clone()
    } else {
        q.clone()
    };
    check_choice_axioms_of(market, s, pool, &eval_q, &result)
}

/// Same checks against an already-computed result and evaluation quotas.
pub fn check_choice_axioms_of(
    market: &Market,
    s: InstitutionId,
    pool: &[ApplicantId],
    eval_q: &CapacityVector,
    result: &ChoiceResult,
) -> ChoiceAxioms {
    let scheme = &market.scheme;
    let open = scheme.open();
    let acceptable: Vec<ApplicantId> = market
        .ranked(s)
        .iter()
        .copied()
        .filter(|i| pool.contains(i))
        .collect();

    let mut over_and_above = AuditReport::new(Axiom::OverAndAbove);
    for (pos, &i) in acceptable.iter().enumerate() {
        let rank = pos as u32 + 1;
        if rank <= eval_q.get(open) && result.tag_of(i) != Some(open) {
            over_and_above.witnesses.push(Witness::RankWithinOpenQuota {
                applicant: i,
                rank,
                quota: eval_q.get(open),
            });
        }
    }

    let mut within_category_fairness = AuditReport::new(Axiom::WithinCategoryFairness);
    for (pos, &i) in acceptable.iter().enumerate() {
        if result.contains(i) {
            continue;
        }
        for &j in &acceptable[pos + 1..] {
            let same_type = market.applicant(i).effective_category()
                == market.applicant(j).effective_category();
            if same_type && result.contains(j) {
                within_category_fairness
                    .witnesses
                    .push(Witness::UnfairWithinCategory {
                        rejected: i,
                        chosen: j,
                    });
            }
        }
    }

    let mut quota_filling = AuditReport::new(Axiom::QuotaFilling);
    for &i in &acceptable {
        if result.contains(i) {
            continue;
        }
        if let Some(r) = market.applicant(i).effective_category() {
            let filled = result.tag_count(r);
            if filled != eval_q.get(r) {
                quota_filling.witnesses.push(Witness::QuotaNotFilled {
                    applicant: i,
                    category: r,
                    filled,
                    quota: eval_q.get(r),
                });
            }
        }
    }

    ChoiceAxioms {
        over_and_above,
        within_category_fairness,
        quota_filling,
    }
}

/// Run every assignment-level checker plus stability; used by the audit
/// command and the fuzz harness.
pub fn full_audit(market: &Market, a: &Assignment) -> Vec<AuditReport> {
    vec![
        check_individual_rationality(market, a),
        check_meritocracy(market, a),
        check_non_wastefulness(market, a),
        check_open_first(market, a),
        find_blocking_pairs(market, a).to_audit_report(),
    ]
}

/// Black-box spirit-of-affirmative-action check for arbitrary choice rules;
/// lives here so rule fixtures in tests can reuse witness plumbing.
pub fn spirit_witness(
    market: &Market,
    s: InstitutionId,
    rule: &dyn ChoiceFn,
    q: &CapacityVector,
    pool: &[ApplicantId],
    applicant: ApplicantId,
) -> Option<Witness> {
    let reporting = market.with_reported(applicant, true);
    if rule.choose(&reporting, s, pool, q).contains(applicant) {
        return None;
    }
    let hiding = market.with_reported(applicant, false);
    if rule.choose(&hiding, s, pool, q).contains(applicant) {
        Some(Witness::SpiritViolation {
            applicant,
            pool: pool.to_vec(),
        })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::{da_bt, multi_run_da};
    use crate::model::{Applicant, CategoryScheme, Institution, Score};

    fn app(id: &str, score: i64, cat: Option<&str>, scheme: &CategoryScheme) -> Applicant {
        let category = cat.map(|c| scheme.by_name(c).unwrap());
        Applicant {
            id: id.to_string(),
            score: Score::from_int(score),
            category,
            reported: category.is_some(),
        }
    }

    fn inst(id: &str, q: [u32; 4]) -> Institution {
        Institution {
            id: id.to_string(),
            capacities: CapacityVector::new(q.to_vec()),
            cutoff: None,
            merit_override: None,
        }
    }

    /// The true-preference two-institution market.
    fn example4() -> Market {
        let scheme = CategoryScheme::india();
        let apps = vec![
            app("i1", 100, None, &scheme),
            app("i2", 99, None, &scheme),
            app("i3", 98, Some("OBC"), &scheme),
            app("i4", 97, Some("OBC"), &scheme),
        ];
        let insts = vec![inst("a", [1, 0, 0, 1]), inst("b", [1, 0, 0, 1])];
        let prefs = vec![
            vec![InstitutionId(0), InstitutionId(1)],
            vec![InstitutionId(0), InstitutionId(1)],
            vec![InstitutionId(1), InstitutionId(0)],
            vec![InstitutionId(1), InstitutionId(0)],
        ];
        Market::new(scheme, apps, insts, prefs, false).unwrap()
    }

    fn a_id() -> InstitutionId {
        InstitutionId(0)
    }

    fn b_id() -> InstitutionId {
        InstitutionId(1)
    }

    #[test]
    fn individual_rationality_on_mechanism_output() {
        let m = example4();
        let run = da_bt(&m);
        assert!(check_individual_rationality(&m, &run.outcome).passed());
        assert!(check_individual_rationality(&m, &Assignment::empty(4)).passed());
    }

    #[test]
    fn individual_rationality_flags_unlisted_institution() {
        let m = example4();
        let open = m.scheme.open();
        // i2 listed a and b only in this market; force a seat at an unlisted one
        let mut m2 = m.clone();
        m2.preferences[1] = vec![a_id()];
        let bad = Assignment::new(vec![None, Some((b_id(), open)), None, None]);
        let report = check_individual_rationality(&m2, &bad);
        assert_eq!(
            report.witnesses,
            vec![Witness::Unacceptable {
                applicant: ApplicantId(1),
                institution: b_id(),
            }]
        );
    }

    #[test]
    fn meritocracy_passes_multi_run_outcome() {
        let m = example4();
        let run = multi_run_da(&m);
        assert!(check_meritocracy(&m, &run.outcome).passed());
    }

    #[test]
    fn meritocracy_flags_swapped_seats() {
        let m = example4();
        let open = m.scheme.open();
        let obc = m.scheme.by_name("OBC").unwrap();
        // swap i1 and i2 relative to the multi-run outcome
        let swapped = Assignment::new(vec![
            Some((b_id(), open)),
            Some((a_id(), open)),
            Some((b_id(), obc)),
            Some((a_id(), obc)),
        ]);
        let report = check_meritocracy(&m, &swapped);
        assert!(report.witnesses.contains(&Witness::MeritViolation {
            applicant: ApplicantId(0),
            institution: a_id(),
            category: open,
            holder: ApplicantId(1),
        }));
    }

    #[test]
    fn meritocracy_vacuous_when_everyone_is_at_top_choice() {
        let m = example4();
        let run = da_bt(&m);
        let report = check_meritocracy(&m, &run.outcome);
        assert!(report.passed());
    }

    #[test]
    fn non_wastefulness_passes_multi_run_outcome() {
        let m = example4();
        let run = multi_run_da(&m);
        assert!(check_non_wastefulness(&m, &run.outcome).passed());
    }

    #[test]
    fn non_wastefulness_flags_vacant_eligible_seat() {
        let m = example4();
        let open = m.scheme.open();
        let obc = m.scheme.by_name("OBC").unwrap();
        // multi-run outcome minus i4: the OBC seat at a sits empty
        let a = Assignment::new(vec![
            Some((a_id(), open)),
            Some((b_id(), open)),
            Some((b_id(), obc)),
            None,
        ]);
        let report = check_non_wastefulness(&m, &a);
        assert!(report.witnesses.iter().any(|w| matches!(
            w,
            Witness::Waste {
                applicant: ApplicantId(3),
                institution,
                ..
            } if *institution == a_id()
        )));
    }

    #[test]
    fn open_first_passes_da_bt_outputs() {
        let m = example4();
        assert!(check_open_first(&m, &da_bt(&m).outcome).passed());
    }

    #[test]
    fn open_first_flags_reserved_tag_with_open_seat_empty() {
        let m = example4();
        let obc = m.scheme.by_name("OBC").unwrap();
        let a = Assignment::new(vec![None, None, None, Some((a_id(), obc))]);
        let report = check_open_first(&m, &a);
        assert!(report.witnesses.iter().any(|w| matches!(
            w,
            Witness::OpenTagsNotMaximal {
                open_tags: 0,
                expected: 1,
                ..
            }
        )));
    }

    #[test]
    fn open_first_flags_unreverted_vacancy() {
        // one applicant on open while a dereservable seat is vacant and the
        // pool size condition still holds
        let scheme = CategoryScheme::india();
        let apps = vec![
            app("i1", 10, None, &scheme),
            app("i2", 9, Some("OBC"), &scheme),
        ];
        let insts = vec![inst("a", [1, 0, 0, 2])];
        let prefs = vec![vec![InstitutionId(0)], vec![InstitutionId(0)]];
        let m = Market::new(scheme, apps, insts, prefs, false).unwrap();
        let open = m.scheme.open();
        let obc = m.scheme.by_name("OBC").unwrap();
        let a = Assignment::new(vec![Some((a_id(), open)), Some((a_id(), obc))]);
        let report = check_open_first(&m, &a);
        assert!(report.witnesses.iter().any(|w| matches!(
            w,
            Witness::OpenTagsNotMaximal {
                open_tags: 1,
                expected: 2,
                ..
            }
        )));
    }

    #[test]
    fn open_first_flags_merit_inversion() {
        let m = example4();
        let open = m.scheme.open();
        let obc = m.scheme.by_name("OBC").unwrap();
        // i4 on open and i3 on OBC at b, but i3 outranks i4
        let a = Assignment::new(vec![None, None, Some((b_id(), obc)), Some((b_id(), open))]);
        let report = check_open_first(&m, &a);
        assert!(report.witnesses.contains(&Witness::OpenBelowReserved {
            institution: b_id(),
            open_holder: ApplicantId(3),
            reserved_holder: ApplicantId(2),
        }));
    }

    #[test]
    fn open_first_accepts_lone_reported_member_on_open_seat() {
        // a single declared OBC applicant takes the open seat; the vacant OBC
        // seat reverts, so one open tag is maximal
        let scheme = CategoryScheme::india();
        let apps = vec![app("i1", 10, Some("OBC"), &scheme)];
        let insts = vec![inst("a", [1, 0, 0, 1])];
        let m = Market::new(scheme, apps, insts, vec![vec![InstitutionId(0)]], false).unwrap();
        let run = da_bt(&m);
        assert!(check_open_first(&m, &run.outcome).passed());
    }

    #[test]
    fn stability_of_multi_run_outcome_example4() {
        let m = example4();
        let run = multi_run_da(&m);
        let report = find_blocking_pairs(&m, &run.outcome);
        assert!(report.is_stable());
    }

    #[test]
    fn stability_of_da_bt_outcome_example4() {
        let m = example4();
        let run = da_bt(&m);
        assert!(find_blocking_pairs(&m, &run.outcome).is_stable());
    }

    #[test]
    fn blocking_pairs_found_after_swap() {
        let m = example4();
        let open = m.scheme.open();
        let obc = m.scheme.by_name("OBC").unwrap();
        // (a: {i1, i3}, b: {i2, i4}) instead of the DA-BT outcome
        let swapped = Assignment::new(vec![
            Some((a_id(), open)),
            Some((b_id(), open)),
            Some((a_id(), obc)),
            Some((b_id(), obc)),
        ]);
        let report = find_blocking_pairs(&m, &swapped);
        assert!(report.blocking.contains(&(ApplicantId(2), b_id())));
        assert!(!report.is_stable());
    }

    #[test]
    fn choice_axioms_pass_india_on_impossibility_market() {
        let m = crate::choice::tests::example1();
        let s = InstitutionId(0);
        let pool: Vec<ApplicantId> = m.applicant_ids().collect();
        let q = m.institution(s).capacities.clone();
        let axioms = check_choice_axioms(&m, s, ChoiceRule::India, &pool, &q);
        assert!(axioms.all_passed());
    }

    #[test]
    fn choice_axioms_fairness_holds_for_thakur_literal() {
        let m = crate::choice::tests::example1();
        let s = InstitutionId(0);
        let pool: Vec<ApplicantId> = m.applicant_ids().collect();
        let q = m.institution(s).capacities.clone();
        let axioms = check_choice_axioms(&m, s, ChoiceRule::ThakurLiteral, &pool, &q);
        assert!(axioms.within_category_fairness.passed());
    }

    #[test]
    fn choice_axioms_pass_backward_transfers_against_final_quotas() {
        let m = crate::choice::tests::example2();
        let s = InstitutionId(0);
        let pool: Vec<ApplicantId> = m.applicant_ids().collect();
        let q = m.institution(s).capacities.clone();
        let axioms = check_choice_axioms(&m, s, ChoiceRule::BackwardTransfers, &pool, &q);
        assert!(axioms.all_passed());
    }

    #[test]
    fn over_and_above_flags_skipped_top_scorer() {
        let m = crate::choice::tests::example1();
        let s = InstitutionId(0);
        let pool: Vec<ApplicantId> = m.applicant_ids().collect();
        let q = m.institution(s).capacities.clone();
        // a rule that skips the top scorer for open seats
        let skipping = |market: &Market,
                        s: InstitutionId,
                        pool: &[ApplicantId],
                        q: &CapacityVector|
         -> ChoiceResult {
            let tail: Vec<ApplicantId> = pool.iter().copied().skip(1).collect();
            crate::choice::choose_india(market, s, &tail, q)
        };
        let result = skipping(&m, s, &pool, &q);
        let axioms = check_choice_axioms_of(&m, s, &pool, &q, &result);
        assert!(axioms
            .over_and_above
            .witnesses
            .iter()
            .any(|w| matches!(w, Witness::RankWithinOpenQuota { rank: 1, .. })));
    }
}
