//! Centralized clearinghouse algorithms: applicant-proposing deferred
//! acceptance over a pluggable choice rule, the multi-run variant that
//! reverts vacancies between whole runs, and the single-pass DA-BT.

use std::collections::BTreeSet;

use crate::choice::{ChoiceResult, ChoiceRule};
use crate::model::{
    ApplicantId, Assignment, CapacityVector, CategoryId, InstitutionId, Market,
};

/// Which clearinghouse algorithm produced a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mechanism {
    /// One deferred-acceptance pass with the India reserves rule at fixed
    /// capacities; no de-reservation anywhere.
    DaIndia,
    /// Repeated full DA passes, reverting vacant dereservable seats to open
    /// between passes until none remain.
    MultiRunDa,
    /// One deferred-acceptance pass where every institution chooses with
    /// the backward-transfers rule.
    DaBt,
}

impl Mechanism {
    pub fn name(self) -> &'static str {
        match self {
            Mechanism::DaIndia => "da-in",
            Mechanism::MultiRunDa => "multi-run-da",
            Mechanism::DaBt => "da-bt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "da-in" => Some(Mechanism::DaIndia),
            "multi-run-da" => Some(Mechanism::MultiRunDa),
            "da-bt" => Some(Mechanism::DaBt),
            _ => None,
        }
    }
}

/// A completed mechanism run with enough trace to audit it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MechanismRun {
    pub mechanism: Mechanism,
    pub outcome: Assignment,
    /// Proposal rounds of the pass that produced the outcome.
    pub da_steps: usize,
    /// Multi-run only: the capacity profile each full DA pass ran under,
    /// initial distribution first.
    pub outer_iterations: Vec<Vec<CapacityVector>>,
    /// Terminal choice state per institution (tags, final capacities, trace).
    pub terminal_choices: Vec<ChoiceResult>,
}

impl MechanismRun {
    /// Outer iteration count; the paper's L for multi-run DA, 1 otherwise.
    pub fn outer_count(&self) -> usize {
        self.outer_iterations.len().max(1)
    }

    /// Last backward-transfers iteration per institution (the paper's N_s);
    /// 1 for the India rule.
    pub fn institution_iterations(&self) -> Vec<usize> {
        self.terminal_choices
            .iter()
            .map(|c| c.last_iteration())
            .collect()
    }

    pub fn final_capacities(&self, s: InstitutionId) -> &CapacityVector {
        &self.terminal_choices[s.0].final_capacities
    }
}

struct DaPass {
    held: Vec<Vec<ApplicantId>>,
    results: Vec<ChoiceResult>,
    steps: usize,
}

/// One applicant-proposing deferred-acceptance pass. Every applicant free at
/// the start of a round proposes to the best institution that has not
/// rejected them; institutions re-choose from held plus new proposers.
fn da_pass(market: &Market, rule: ChoiceRule, capacities: &[CapacityVector]) -> DaPass {
    let n = market.applicants.len();
    let m = market.institutions.len();
    let mut next_choice = vec![0usize; n];
    let mut holder: Vec<Option<InstitutionId>> = vec![None; n];
    let mut held: Vec<Vec<ApplicantId>> = vec![Vec::new(); m];
    // institutions that never receive a proposal keep their empty-pool choice
    let mut results: Vec<ChoiceResult> = market
        .institution_ids()
        .map(|s| rule.choose(market, s, &[], &capacities[s.0]))
        .collect();
    let mut steps = 0usize;
    loop {
        let mut proposals: Vec<Vec<ApplicantId>> = vec![Vec::new(); m];
        let mut proposed = false;
        for i in market.applicant_ids() {
            if holder[i.0].is_none() && next_choice[i.0] < market.preferences[i.0].len() {
                let target = market.preferences[i.0][next_choice[i.0]];
                next_choice[i.0] += 1;
                proposals[target.0].push(i);
                proposed = true;
            }
        }
        if !proposed {
            break;
        }
        steps += 1;
        for s in market.institution_ids() {
            if proposals[s.0].is_empty() {
                continue;
            }
            let mut pool: Vec<ApplicantId> = held[s.0].clone();
            pool.extend(proposals[s.0].iter().copied());
            pool.sort_unstable();
            let result = rule.choose(market, s, &pool, &capacities[s.0]);
            for &i in &pool {
                holder[i.0] = None;
            }
            let chosen: Vec<ApplicantId> = result.chosen.iter().map(|(i, _)| *i).collect();
            for &i in &chosen {
                holder[i.0] = Some(s);
            }
            held[s.0] = chosen;
            results[s.0] = result;
        }
    }
    DaPass {
        held,
        results,
        steps,
    }
}

fn assignment_from(market: &Market, results: &[ChoiceResult]) -> Assignment {
    let mut seats: Vec<Option<(InstitutionId, CategoryId)>> =
        vec![None; market.applicants.len()];
    for s in market.institution_ids() {
        for &(i, c) in &results[s.0].chosen {
            debug_assert!(seats[i.0].is_none());
            seats[i.0] = Some((s, c));
        }
    }
    Assignment::new(seats)
}

fn initial_capacities(market: &Market) -> Vec<CapacityVector> {
    market
        .institutions
        .iter()
        .map(|inst| inst.capacities.clone())
        .collect()
}

/// One deferred-acceptance pass with the given rule at the market's initial
/// capacities. Category tags come from each institution's terminal choice.
pub fn deferred_acceptance(market: &Market, rule: ChoiceRule) -> MechanismRun {
    let caps = initial_capacities(market);
    let pass = da_pass(market, rule, &caps);
    let outcome = assignment_from(market, &pass.results);
    MechanismRun {
        mechanism: match rule {
            ChoiceRule::BackwardTransfers => Mechanism::DaBt,
            _ => Mechanism::DaIndia,
        },
        outcome,
        da_steps: pass.steps,
        outer_iterations: Vec::new(),
        terminal_choices: pass.results,
    }
}

/// Multi-run DA: full DA passes with the India rule, reverting every
/// institution's vacant dereservable seats to open after each pass, until
/// no revertible vacancy remains anywhere.
pub fn multi_run_da(market: &Market) -> MechanismRun {
    let scheme = &market.scheme;
    let mut caps = initial_capacities(market);
    let mut outer: Vec<Vec<CapacityVector>> = Vec::new();
    loop {
        outer.push(caps.clone());
        let pass = da_pass(market, ChoiceRule::India, &caps);
        let mut any_vacancy = false;
        let mut next = caps.clone();
        for s in market.institution_ids() {
            let last = pass.results[s.0]
                .iterations
                .last()
                .expect("india pass records one iteration");
            let transfers: Vec<(CategoryId, u32)> = scheme
                .dereservable()
                .iter()
                .map(|&c| (c, last.vacancies[c.0]))
                .filter(|&(_, v)| v > 0)
                .collect();
            if !transfers.is_empty() {
                any_vacancy = true;
                next[s.0] = next[s.0].transfer_to_open(scheme, &transfers);
            }
        }
        if !any_vacancy {
            let outcome = assignment_from(market, &pass.results);
            return MechanismRun {
                mechanism: Mechanism::MultiRunDa,
                outcome,
                da_steps: pass.steps,
                outer_iterations: outer,
                terminal_choices: pass.results,
            };
        }
        caps = next;
    }
}

/// DA-BT: a single deferred-acceptance pass where each institution chooses
/// with the backward-transfers rule, de-reserving inside each choice.
pub fn da_bt(market: &Market) -> MechanismRun {
    deferred_acceptance(market, ChoiceRule::BackwardTransfers)
}

pub fn run_mechanism(market: &Market, mechanism: Mechanism) -> MechanismRun {
    match mechanism {
        Mechanism::DaIndia => deferred_acceptance(market, ChoiceRule::India),
        Mechanism::MultiRunDa => multi_run_da(market),
        Mechanism::DaBt => da_bt(market),
    }
}

/// Convenience view of who holds seats at `s`.
pub fn matched_set(run: &MechanismRun, s: InstitutionId) -> BTreeSet<ApplicantId> {
    run.terminal_choices[s.0].chosen_set()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Applicant, CategoryScheme, Institution, Score};
    use crate::model::validate_assignment;

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

    /// Two institutions with one open and one OBC seat each; GC pair ranked
    /// above the OBC pair. Preferences vary per example.
    fn two_institution_market(i2_prefs: Vec<usize>) -> Market {
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
            i2_prefs.into_iter().map(InstitutionId).collect(),
            vec![InstitutionId(1), InstitutionId(0)],
            vec![InstitutionId(1), InstitutionId(0)],
        ];
        Market::new(scheme, apps, insts, prefs, false).unwrap()
    }

    fn truncated_report_market() -> Market {
        two_institution_market(vec![0])
    }

    fn true_preference_market() -> Market {
        two_institution_market(vec![0, 1])
    }

    fn single_institution_market() -> Market {
        let scheme = CategoryScheme::india();
        let apps = vec![
            app("i1", 100, None, &scheme),
            app("i2", 99, None, &scheme),
            app("i3", 98, None, &scheme),
            app("i4", 97, Some("OBC"), &scheme),
            app("i5", 96, Some("SC"), &scheme),
            app("i6", 95, Some("ST"), &scheme),
            app("i7", 94, None, &scheme),
            app("i8", 93, None, &scheme),
        ];
        let insts = vec![inst("s", [3, 1, 1, 3])];
        let prefs = vec![vec![InstitutionId(0)]; 8];
        Market::new(scheme, apps, insts, prefs, false).unwrap()
    }

    fn members(run: &MechanismRun, s: usize) -> Vec<String> {
        matched_set(run, InstitutionId(s))
            .into_iter()
            .map(|i| i.0)
            .map(|i| format!("i{}", i + 1))
            .collect()
    }

    #[test]
    fn da_india_on_truncated_report() {
        let m = truncated_report_market();
        let run = deferred_acceptance(&m, ChoiceRule::India);
        assert_eq!(members(&run, 0), vec!["i1"]);
        assert_eq!(members(&run, 1), vec!["i3", "i4"]);
        assert!(validate_assignment(&m, &run.outcome).is_empty());
    }

    #[test]
    fn da_india_on_true_preferences() {
        let m = true_preference_market();
        let run = deferred_acceptance(&m, ChoiceRule::India);
        assert_eq!(members(&run, 0), vec!["i1", "i4"]);
        assert_eq!(members(&run, 1), vec!["i2", "i3"]);
        assert_eq!(run.da_steps, 3);
    }

    #[test]
    fn da_with_empty_preferences_leaves_everyone_unassigned() {
        let scheme = CategoryScheme::india();
        let apps = vec![app("i1", 10, None, &scheme), app("i2", 9, None, &scheme)];
        let insts = vec![inst("a", [1, 0, 0, 0])];
        let m = Market::new(scheme, apps, insts, vec![vec![], vec![]], false).unwrap();
        let run = deferred_acceptance(&m, ChoiceRule::India);
        assert!(run.outcome.seats().iter().all(|x| x.is_none()));
        assert_eq!(run.da_steps, 0);
    }

    #[test]
    fn multi_run_da_single_institution_drains_in_three() {
        let m = single_institution_market();
        let run = multi_run_da(&m);
        assert_eq!(run.outer_count(), 3);
        assert_eq!(run.final_capacities(InstitutionId(0)).counts(), &[6, 1, 1, 0]);
        assert_eq!(members(&run, 0), vec!["i1", "i2", "i3", "i4", "i5", "i6"]);
        let profile: Vec<&[u32]> = run
            .outer_iterations
            .iter()
            .map(|caps| caps[0].counts())
            .collect();
        assert_eq!(profile, vec![&[3, 1, 1, 3][..], &[5, 1, 1, 1], &[6, 1, 1, 0]]);
    }

    #[test]
    fn multi_run_da_truncated_report() {
        let m = truncated_report_market();
        let run = multi_run_da(&m);
        assert_eq!(run.outer_count(), 2);
        assert_eq!(members(&run, 0), vec!["i1", "i2"]);
        assert_eq!(members(&run, 1), vec!["i3", "i4"]);
        assert_eq!(run.final_capacities(InstitutionId(0)).counts(), &[2, 0, 0, 0]);
        assert_eq!(run.final_capacities(InstitutionId(1)).counts(), &[1, 0, 0, 1]);
    }

    #[test]
    fn multi_run_da_true_preferences_single_iteration() {
        let m = true_preference_market();
        let run = multi_run_da(&m);
        assert_eq!(run.outer_count(), 1);
        assert_eq!(members(&run, 0), vec!["i1", "i4"]);
        assert_eq!(members(&run, 1), vec!["i2", "i3"]);
    }

    #[test]
    fn da_bt_prevents_rejection_chain() {
        let m = true_preference_market();
        let run = da_bt(&m);
        assert_eq!(members(&run, 0), vec!["i1", "i2"]);
        assert_eq!(members(&run, 1), vec!["i3", "i4"]);
        assert_eq!(run.da_steps, 1);
        assert!(validate_assignment(&m, &run.outcome).is_empty());
    }

    #[test]
    fn da_bt_single_institution_matches_multi_run_set() {
        let m = single_institution_market();
        let bt = da_bt(&m);
        let multi = multi_run_da(&m);
        assert_eq!(
            matched_set(&bt, InstitutionId(0)),
            matched_set(&multi, InstitutionId(0))
        );
        assert_eq!(bt.terminal_choices[0].last_iteration(), 3);
    }

    #[test]
    fn da_bt_without_dereservable_seats_equals_da_india() {
        let scheme = CategoryScheme::india();
        let apps = vec![
            app("i1", 10, None, &scheme),
            app("i2", 9, Some("SC"), &scheme),
            app("i3", 8, None, &scheme),
        ];
        let insts = vec![inst("a", [1, 1, 0, 0]), inst("b", [1, 0, 0, 0])];
        let prefs = vec![
            vec![InstitutionId(0), InstitutionId(1)],
            vec![InstitutionId(0), InstitutionId(1)],
            vec![InstitutionId(0), InstitutionId(1)],
        ];
        let m = Market::new(scheme, apps, insts, prefs, false).unwrap();
        let bt = da_bt(&m);
        let india = deferred_acceptance(&m, ChoiceRule::India);
        assert_eq!(bt.outcome, india.outcome);
    }

    #[test]
    fn runs_are_deterministic() {
        let m = true_preference_market();
        assert_eq!(multi_run_da(&m), multi_run_da(&m));
        assert_eq!(da_bt(&m), da_bt(&m));
    }
}
