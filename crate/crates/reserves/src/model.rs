//! Domain types for seat-allocation markets: category schemes, capacities,
//! applicants, institutions, preference profiles, assignments, and matchings.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of an applicant within a [`Market`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ApplicantId(pub usize);

/// Index of an institution within a [`Market`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InstitutionId(pub usize);

/// Index of a position category within a [`CategoryScheme`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CategoryId(pub usize);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("category scheme must contain the open category exactly once")]
    BadOpenCategory,
    #[error("duplicate category name `{0}`")]
    DuplicateCategory(String),
    #[error("open category cannot be reserved")]
    OpenReserved,
    #[error("dereservable category `{0}` is not reserved")]
    DereservableNotReserved(String),
    #[error("applicant `{0}` declares membership but has no reserve category")]
    ReportedWithoutCategory(String),
    #[error("applicant `{0}` has non-reserved category")]
    NonReservedCategory(String),
    #[error("equal scores at institution `{institution}`: applicants `{a}` and `{b}` (enable allow_ties to break by id)")]
    ScoreTie {
        institution: String,
        a: String,
        b: String,
    },
    #[error("duplicate institution in preference list of applicant `{0}`")]
    DuplicatePreference(String),
    #[error("merit override for institution `{institution}` lists applicant `{applicant}` twice")]
    DuplicateMeritEntry {
        institution: String,
        applicant: String,
    },
}

/// The set of position categories: one open category plus reserved categories,
/// a subset of which is dereservable (vacancies revert to open).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryScheme {
    names: Vec<String>,
    open: CategoryId,
    reserved: Vec<CategoryId>,
    dereservable: Vec<CategoryId>,
}

impl CategoryScheme {
    /// Build a scheme from category names. `open` names the unique open
    /// category; `reserved` and `dereservable` name subsets of `names`.
    pub fn new(
        names: Vec<String>,
        open: &str,
        reserved: &[String],
        dereservable: &[String],
    ) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n.clone()) {
                return Err(ModelError::DuplicateCategory(n.clone()));
            }
        }
        let find = |n: &str| names.iter().position(|x| x == n).map(CategoryId);
        let open_id = find(open).ok_or(ModelError::BadOpenCategory)?;
        let mut reserved_ids = Vec::new();
        for r in reserved {
            let id = find(r).ok_or_else(|| ModelError::DuplicateCategory(r.clone()))?;
            if id == open_id {
                return Err(ModelError::OpenReserved);
            }
            reserved_ids.push(id);
        }
        let mut dereservable_ids = Vec::new();
        for d in dereservable {
            let id = find(d).ok_or_else(|| ModelError::DereservableNotReserved(d.clone()))?;
            if !reserved_ids.contains(&id) {
                return Err(ModelError::DereservableNotReserved(d.clone()));
            }
            dereservable_ids.push(id);
        }
        // every non-open category must be reserved, otherwise seats are unreachable
        for (idx, n) in names.iter().enumerate() {
            let id = CategoryId(idx);
            if id != open_id && !reserved_ids.contains(&id) {
                return Err(ModelError::DereservableNotReserved(n.clone()));
            }
        }
        Ok(CategoryScheme {
            names,
            open: open_id,
            reserved: reserved_ids,
            dereservable: dereservable_ids,
        })
    }

    /// The Indian technical-college preset: open plus SC, ST, OBC with OBC dereservable.
    pub fn india() -> Self {
        CategoryScheme::new(
            vec![
                "open".to_string(),
                "SC".to_string(),
                "ST".to_string(),
                "OBC".to_string(),
            ],
            "open",
            &["SC".to_string(), "ST".to_string(), "OBC".to_string()],
            &["OBC".to_string()],
        )
        .expect("india preset is valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn open(&self) -> CategoryId {
        self.open
    }

    pub fn reserved(&self) -> &[CategoryId] {
        &self.reserved
    }

    pub fn dereservable(&self) -> &[CategoryId] {
        &self.dereservable
    }

    pub fn is_reserved(&self, c: CategoryId) -> bool {
        self.reserved.contains(&c)
    }

    pub fn is_dereservable(&self, c: CategoryId) -> bool {
        self.dereservable.contains(&c)
    }

    pub fn name(&self, c: CategoryId) -> &str {
        &self.names[c.0]
    }

    pub fn by_name(&self, name: &str) -> Option<CategoryId> {
        self.names.iter().position(|n| n == name).map(CategoryId)
    }

    pub fn ids(&self) -> impl Iterator<Item = CategoryId> {
        (0..self.names.len()).map(CategoryId)
    }
}

/// Per-category seat counts at one institution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityVector {
    counts: Vec<u32>,
}

impl CapacityVector {
    pub fn new(counts: Vec<u32>) -> Self {
        CapacityVector { counts }
    }

    pub fn zeros(scheme: &CategoryScheme) -> Self {
        CapacityVector {
            counts: vec![0; scheme.len()],
        }
    }

    pub fn get(&self, c: CategoryId) -> u32 {
        self.counts[c.0]
    }

    pub fn set(&mut self, c: CategoryId, v: u32) {
        self.counts[c.0] = v;
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Move `amounts[c]` seats from each dereservable category `c` to open.
    /// Reserved non-dereservable entries and the total are unchanged.
    pub fn transfer_to_open(&self, scheme: &CategoryScheme, amounts: &[(CategoryId, u32)]) -> Self {
        let mut next = self.clone();
        for &(c, n) in amounts {
            debug_assert!(scheme.is_dereservable(c));
            debug_assert!(n <= next.counts[c.0]);
            next.counts[c.0] -= n;
            next.counts[scheme.open().0] += n;
        }
        debug_assert_eq!(next.total(), self.total());
        next
    }
}

/// Exact merit score: a decimal with at most nine fractional digits,
/// stored scaled so comparisons are total and tie detection is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Score(i64);

const SCORE_SCALE: i64 = 1_000_000_000;

impl Score {
    pub fn from_int(v: i64) -> Self {
        Score(v * SCORE_SCALE)
    }

    /// Parse a decimal literal such as `98`, `-1.25`, or `97.333333333`.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let (sign, digits) = match s.strip_prefix('-') {
            Some(rest) => (-1i64, rest),
            None => (1i64, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((a, b)) => (a, b),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if frac_part.len() > 9 {
            return None;
        }
        let mut value: i64 = 0;
        for ch in int_part.chars() {
            value = value.checked_mul(10)?.checked_add(ch.to_digit(10)? as i64)?;
        }
        value = value.checked_mul(SCORE_SCALE)?;
        let mut frac: i64 = 0;
        for ch in frac_part.chars() {
            frac = frac * 10 + ch.to_digit(10)? as i64;
        }
        frac *= 10i64.pow(9 - frac_part.len() as u32);
        Some(Score(sign * value.checked_add(frac)?))
    }

    pub fn raw(&self) -> i64 {
        self.0
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let int = abs / SCORE_SCALE as u64;
        let frac = abs % SCORE_SCALE as u64;
        if frac == 0 {
            write!(f, "{sign}{int}")
        } else {
            let s = format!("{frac:09}");
            write!(f, "{sign}{int}.{}", s.trim_end_matches('0'))
        }
    }
}

/// One applicant: merit score, true reserve category (if any), and whether
/// that membership is declared. Undeclared members count as general category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Applicant {
    pub id: String,
    pub score: Score,
    pub category: Option<CategoryId>,
    pub reported: bool,
}

impl Applicant {
    /// The category the applicant competes under: the declared reserve
    /// category, or none (general category) when membership is undeclared.
    pub fn effective_category(&self) -> Option<CategoryId> {
        if self.reported {
            self.category
        } else {
            None
        }
    }
}

/// One institution: seat distribution plus an optional acceptability cutoff
/// and an optional explicit merit order replacing the score-induced one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Institution {
    pub id: String,
    pub capacities: CapacityVector,
    pub cutoff: Option<Score>,
    pub merit_override: Option<Vec<ApplicantId>>,
}

/// Strict merit order at one institution: `ranked` lists acceptable
/// applicants best-first; `rank[i]` is `None` when `i` is unacceptable.
#[derive(Debug, Clone, PartialEq, Eq)]
struct MeritOrder {
    ranked: Vec<ApplicantId>,
    rank: Vec<Option<u32>>,
}

/// A complete market instance. All fields are immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Market {
    pub scheme: CategoryScheme,
    pub applicants: Vec<Applicant>,
    pub institutions: Vec<Institution>,
    /// Per applicant: acceptable institutions, most preferred first.
    pub preferences: Vec<Vec<InstitutionId>>,
    merit: Vec<MeritOrder>,
}

impl Market {
    pub fn new(
        scheme: CategoryScheme,
        applicants: Vec<Applicant>,
        institutions: Vec<Institution>,
        preferences: Vec<Vec<InstitutionId>>,
        allow_ties: bool,
    ) -> Result<Self, ModelError> {
        assert_eq!(applicants.len(), preferences.len());
        for a in &applicants {
            match a.category {
                Some(c) if !scheme.is_reserved(c) => {
                    return Err(ModelError::NonReservedCategory(a.id.clone()))
                }
                None if a.reported => return Err(ModelError::ReportedWithoutCategory(a.id.clone())),
                _ => {}
            }
        }
        for (i, prefs) in preferences.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for s in prefs {
                if !seen.insert(*s) {
                    return Err(ModelError::DuplicatePreference(applicants[i].id.clone()));
                }
            }
        }
        let merit = institutions
            .iter()
            .map(|inst| build_merit(inst, &applicants, allow_ties))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Market {
            scheme,
            applicants,
            institutions,
            preferences,
            merit,
        })
    }

    pub fn applicant_ids(&self) -> impl Iterator<Item = ApplicantId> {
        (0..self.applicants.len()).map(ApplicantId)
    }

    pub fn institution_ids(&self) -> impl Iterator<Item = InstitutionId> {
        (0..self.institutions.len()).map(InstitutionId)
    }

    pub fn applicant(&self, i: ApplicantId) -> &Applicant {
        &self.applicants[i.0]
    }

    pub fn institution(&self, s: InstitutionId) -> &Institution {
        &self.institutions[s.0]
    }

    /// Acceptable applicants at `s`, best merit first.
    pub fn ranked(&self, s: InstitutionId) -> &[ApplicantId] {
        &self.merit[s.0].ranked
    }

    pub fn acceptable(&self, s: InstitutionId, i: ApplicantId) -> bool {
        self.merit[s.0].rank[i.0].is_some()
    }

    /// True when `i` has strictly higher merit than `j` at `s`.
    /// Unacceptable applicants outrank nobody.
    pub fn outranks(&self, s: InstitutionId, i: ApplicantId, j: ApplicantId) -> bool {
        match (self.merit[s.0].rank[i.0], self.merit[s.0].rank[j.0]) {
            (Some(ri), Some(rj)) => ri < rj,
            (Some(_), None) => true,
            _ => false,
        }
    }

    fn pref_position(&self, i: ApplicantId, s: InstitutionId) -> Option<usize> {
        self.preferences[i.0].iter().position(|x| *x == s)
    }

    /// True when applicant `i` strictly prefers `a` to `b` (`None` = unmatched).
    pub fn strictly_prefers(
        &self,
        i: ApplicantId,
        a: Option<InstitutionId>,
        b: Option<InstitutionId>,
    ) -> bool {
        self.utility(i, a) < self.utility(i, b)
    }

    /// Position in the preference list; unmatched ranks after every listed
    /// institution, unlisted institutions rank below unmatched.
    fn utility(&self, i: ApplicantId, x: Option<InstitutionId>) -> usize {
        match x {
            None => self.preferences[i.0].len(),
            Some(s) => self
                .pref_position(i, s)
                .unwrap_or(self.preferences[i.0].len() + 1),
        }
    }

    /// Institutions applicant `i` strictly prefers to `current`.
    pub fn preferred_to(
        &self,
        i: ApplicantId,
        current: Option<InstitutionId>,
    ) -> impl Iterator<Item = InstitutionId> + '_ {
        let cut = self.utility(i, current);
        self.preferences[i.0]
            .iter()
            .take(cut)
            .copied()
            .collect::<Vec<_>>()
            .into_iter()
    }

    /// Copy of the market with applicant `i`'s declaration flag replaced.
    pub fn with_reported(&self, i: ApplicantId, reported: bool) -> Market {
        let mut m = self.clone();
        m.applicants[i.0].reported = reported;
        m
    }

    /// Copy of the market with applicant `i`'s preference list replaced.
    pub fn with_preferences(&self, i: ApplicantId, prefs: Vec<InstitutionId>) -> Market {
        let mut m = self.clone();
        m.preferences[i.0] = prefs;
        m
    }
}

fn build_merit(
    inst: &Institution,
    applicants: &[Applicant],
    allow_ties: bool,
) -> Result<MeritOrder, ModelError> {
    let mut ranked: Vec<ApplicantId> = Vec::new();
    if let Some(order) = &inst.merit_override {
        let mut seen = BTreeSet::new();
        for &i in order {
            if !seen.insert(i) {
                return Err(ModelError::DuplicateMeritEntry {
                    institution: inst.id.clone(),
                    applicant: applicants[i.0].id.clone(),
                });
            }
            if inst
                .cutoff
                .map_or(true, |cut| applicants[i.0].score >= cut)
            {
                ranked.push(i);
            }
        }
    } else {
        ranked = (0..applicants.len())
            .map(ApplicantId)
            .filter(|i| {
                inst.cutoff
                    .map_or(true, |cut| applicants[i.0].score >= cut)
            })
            .collect();
        ranked.sort_by(|a, b| {
            applicants[b.0]
                .score
                .cmp(&applicants[a.0].score)
                .then_with(|| applicants[a.0].id.cmp(&applicants[b.0].id))
        });
        for w in ranked.windows(2) {
            if applicants[w[0].0].score == applicants[w[1].0].score && !allow_ties {
                return Err(ModelError::ScoreTie {
                    institution: inst.id.clone(),
                    a: applicants[w[0].0].id.clone(),
                    b: applicants[w[1].0].id.clone(),
                });
            }
        }
    }
    let mut rank = vec![None; applicants.len()];
    for (pos, &i) in ranked.iter().enumerate() {
        rank[i.0] = Some(pos as u32);
    }
    Ok(MeritOrder { ranked, rank })
}

/// A mechanism outcome: each applicant is unassigned or holds a position of
/// a specific category at a specific institution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    seats: Vec<Option<(InstitutionId, CategoryId)>>,
}

impl Assignment {
    pub fn new(seats: Vec<Option<(InstitutionId, CategoryId)>>) -> Self {
        Assignment { seats }
    }

    pub fn empty(n_applicants: usize) -> Self {
        Assignment {
            seats: vec![None; n_applicants],
        }
    }

    pub fn of(&self, i: ApplicantId) -> Option<(InstitutionId, CategoryId)> {
        self.seats[i.0]
    }

    pub fn institution_of(&self, i: ApplicantId) -> Option<InstitutionId> {
        self.seats[i.0].map(|(s, _)| s)
    }

    pub fn seats(&self) -> &[Option<(InstitutionId, CategoryId)>] {
        &self.seats
    }

    /// The (applicant, category) pairs held at institution `s`, in applicant order.
    pub fn at_institution(&self, s: InstitutionId) -> Vec<(ApplicantId, CategoryId)> {
        self.seats
            .iter()
            .enumerate()
            .filter_map(|(i, seat)| match seat {
                Some((inst, c)) if *inst == s => Some((ApplicantId(i), *c)),
                _ => None,
            })
            .collect()
    }

    /// Number of seats at `s` tagged with category `c`.
    pub fn tag_count(&self, s: InstitutionId, c: CategoryId) -> u32 {
        self.at_institution(s)
            .iter()
            .filter(|(_, cat)| *cat == c)
            .count() as u32
    }
}

/// An assignment with category tags dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    assigned: Vec<Option<InstitutionId>>,
}

impl Matching {
    pub fn of(&self, i: ApplicantId) -> Option<InstitutionId> {
        self.assigned[i.0]
    }

    pub fn members(&self, s: InstitutionId) -> Vec<ApplicantId> {
        self.assigned
            .iter()
            .enumerate()
            .filter_map(|(i, m)| (*m == Some(s)).then_some(ApplicantId(i)))
            .collect()
    }

    pub fn assigned(&self) -> &[Option<InstitutionId>] {
        &self.assigned
    }
}

/// Drop category tags from an assignment.
pub fn induce_matching(a: &Assignment) -> Matching {
    Matching {
        assigned: a.seats().iter().map(|x| x.map(|(s, _)| s)).collect(),
    }
}

/// One violated feasibility clause of an assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssignmentViolation {
    /// Applicant holds a category they are not eligible for.
    Eligibility {
        applicant: ApplicantId,
        institution: InstitutionId,
        category: CategoryId,
    },
    /// A reserved category holds more applicants than its quota.
    CategoryCapacity {
        institution: InstitutionId,
        category: CategoryId,
        used: u32,
        quota: u32,
    },
    /// Open plus dereservable tags exceed the combined open pool.
    OpenPoolCapacity {
        institution: InstitutionId,
        used: u32,
        quota: u32,
    },
    /// More applicants assigned than total seats.
    TotalCapacity {
        institution: InstitutionId,
        used: u32,
        quota: u32,
    },
}

impl AssignmentViolation {
    pub fn render(&self, market: &Market) -> String {
        match self {
            AssignmentViolation::Eligibility {
                applicant,
                institution,
                category,
            } => format!(
                "applicant {} is not eligible for a {} position at {}",
                market.applicant(*applicant).id,
                market.scheme.name(*category),
                market.institution(*institution).id
            ),
            AssignmentViolation::CategoryCapacity {
                institution,
                category,
                used,
                quota,
            } => format!(
                "institution {} holds {} {} positions but quota is {}",
                market.institution(*institution).id,
                used,
                market.scheme.name(*category),
                quota
            ),
            AssignmentViolation::OpenPoolCapacity {
                institution,
                used,
                quota,
            } => format!(
                "institution {} holds {} open-pool positions but open plus dereservable quota is {}",
                market.institution(*institution).id,
                used,
                quota
            ),
            AssignmentViolation::TotalCapacity {
                institution,
                used,
                quota,
            } => format!(
                "institution {} holds {} positions but has {} seats",
                market.institution(*institution).id,
                used,
                quota
            ),
        }
    }
}

/// Check the assignment feasibility clauses: eligibility, per-category
/// quotas, the combined open pool, and total seats. Empty report = feasible.
pub fn validate_assignment(market: &Market, a: &Assignment) -> Vec<AssignmentViolation> {
    let mut violations = Vec::new();
    let scheme = &market.scheme;
    for i in market.applicant_ids() {
        if let Some((s, c)) = a.of(i) {
            let eligible = c == scheme.open() || market.applicant(i).effective_category() == Some(c);
            if !eligible {
                violations.push(AssignmentViolation::Eligibility {
                    applicant: i,
                    institution: s,
                    category: c,
                });
            }
        }
    }
    for s in market.institution_ids() {
        let held = a.at_institution(s);
        let q = &market.institution(s).capacities;
        for &r in scheme.reserved() {
            let used = held.iter().filter(|(_, c)| *c == r).count() as u32;
            if used > q.get(r) {
                violations.push(AssignmentViolation::CategoryCapacity {
                    institution: s,
                    category: r,
                    used,
                    quota: q.get(r),
                });
            }
        }
        let open_pool_used = held
            .iter()
            .filter(|(_, c)| *c == scheme.open() || scheme.is_dereservable(*c))
            .count() as u32;
        let open_pool_quota = q.get(scheme.open())
            + scheme
                .dereservable()
                .iter()
                .map(|&d| q.get(d))
                .sum::<u32>();
        if open_pool_used > open_pool_quota {
            violations.push(AssignmentViolation::OpenPoolCapacity {
                institution: s,
                used: open_pool_used,
                quota: open_pool_quota,
            });
        }
        if held.len() as u32 > q.total() {
            violations.push(AssignmentViolation::TotalCapacity {
                institution: s,
                used: held.len() as u32,
                quota: q.total(),
            });
        }
    }
    violations
}
