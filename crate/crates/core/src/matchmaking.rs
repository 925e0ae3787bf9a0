//! Profiles and matchmaking: interest-set similarity over the taxonomy,
//! a proximity factor that attenuates with observer distance, the combined
//! relevance score, match classification, and candidate ranking.
//!
//! Relevance is `profile_similarity × proximity_factor`: profiles with
//! similar interests score near 1 when the observer is near, and the score
//! never increases with distance.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{ConceptId, Taxonomy, TaxonomyError};

/// Identity of a person across the graph and the protocol.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct PersonId(pub u64);

impl std::fmt::Display for PersonId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Female,
    Male,
    #[default]
    Unspecified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionState {
    Still,
    Walking,
    Vehicle,
}

/// Dynamic context carried with a profile. Exchanged between peers but not
/// scored; only `location` feeds the proximity factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DynamicContext {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activity: Option<String>,
    /// Degrees in [0, 360).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion_state: Option<MotionState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<String>,
    /// Planar coordinates in meters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<[f64; 2]>,
}

/// A person's profile: static attributes plus the interest concept set and
/// dynamic context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub person_id: PersonId,
    pub name: String,
    pub age: u32,
    pub gender: Gender,
    pub interests: BTreeSet<ConceptId>,
    #[serde(default)]
    pub context: DynamicContext,
}

#[derive(Debug, Error, PartialEq)]
pub enum MatchmakingError {
    #[error("unknown concept {0} in interest set")]
    UnknownConcept(ConceptId),
    #[error("unknown interest label {0:?}")]
    UnknownLabel(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid match parameters: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    DomainError(String),
}

impl From<TaxonomyError> for MatchmakingError {
    fn from(e: TaxonomyError) -> Self {
        match e {
            TaxonomyError::UnknownConcept(c) => MatchmakingError::UnknownConcept(c),
            TaxonomyError::UnknownPath(p) => MatchmakingError::UnknownLabel(p),
            other => MatchmakingError::DomainError(other.to_string()),
        }
    }
}

impl Profile {
    /// Validates invariants: non-empty name, orientation in [0, 360),
    /// all interests present in the taxonomy.
    pub fn validate(&self, taxonomy: &Taxonomy) -> Result<(), MatchmakingError> {
        if self.name.is_empty() {
            return Err(MatchmakingError::InvalidProfile("name is empty".into()));
        }
        if let Some(o) = self.context.orientation {
            if !(0.0..360.0).contains(&o) {
                return Err(MatchmakingError::InvalidProfile(format!(
                    "orientation {o} outside [0, 360)"
                )));
            }
        }
        for &c in &self.interests {
            if !taxonomy.contains(c) {
                return Err(MatchmakingError::UnknownConcept(c));
            }
        }
        Ok(())
    }
}

/// Profile document as stored on disk: interests are full label paths
/// (`Music/Jazz`) resolved against a taxonomy on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub person_id: Option<u64>,
    pub name: String,
    #[serde(default)]
    pub age: u32,
    #[serde(default)]
    pub gender: Gender,
    #[serde(default)]
    pub interests: Vec<String>,
    #[serde(default)]
    pub context: DynamicContext,
}

impl ProfileDoc {
    /// Resolves interest label paths against the taxonomy. `fallback_id` is
    /// used when the document does not carry a person id.
    pub fn resolve(
        &self,
        taxonomy: &Taxonomy,
        fallback_id: PersonId,
    ) -> Result<Profile, MatchmakingError> {
        let mut interests = BTreeSet::new();
        for label in &self.interests {
            let c = taxonomy
                .resolve_path(label)
                .map_err(|_| MatchmakingError::UnknownLabel(label.clone()))?;
            interests.insert(c);
        }
        let profile = Profile {
            person_id: self.person_id.map(PersonId).unwrap_or(fallback_id),
            name: self.name.clone(),
            age: self.age,
            gender: self.gender,
            interests,
            context: self.context.clone(),
        };
        profile.validate(taxonomy)?;
        Ok(profile)
    }
}

/// Thresholds and decay constants for the relevance computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchParams {
    /// Classification threshold for a plain match; inclusive.
    pub match_threshold: f64,
    /// Distance within which the proximity factor is exactly 1.
    pub near_radius_m: f64,
    /// Exponential decay length of the proximity factor beyond the near radius.
    pub decay_length_m: f64,
    /// Value at or above which a score classifies as an exact match.
    pub exact_match_floor: f64,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            match_threshold: 0.75,
            near_radius_m: 10.0,
            decay_length_m: 100.0,
            exact_match_floor: 0.9999,
        }
    }
}

impl MatchParams {
    pub fn validate(&self) -> Result<(), MatchmakingError> {
        if !(self.match_threshold > 0.0 && self.match_threshold <= 1.0) {
            return Err(MatchmakingError::InvalidParams(format!(
                "match_threshold {} outside (0, 1]",
                self.match_threshold
            )));
        }
        if self.match_threshold > self.exact_match_floor {
            return Err(MatchmakingError::InvalidParams(format!(
                "match_threshold {} exceeds exact_match_floor {}",
                self.match_threshold, self.exact_match_floor
            )));
        }
        if !(self.near_radius_m > 0.0) {
            return Err(MatchmakingError::InvalidParams("near_radius_m must be > 0".into()));
        }
        if !(self.decay_length_m > 0.0) {
            return Err(MatchmakingError::InvalidParams("decay_length_m must be > 0".into()));
        }
        Ok(())
    }
}

/// The relevance of one profile seen from another at a given distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelevanceScore {
    pub value: f64,
    pub profile_similarity: f64,
    pub proximity_factor: f64,
    pub observer_distance_m: f64,
}

/// Match classification in increasing order of strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchClass {
    NoMatch,
    Match,
    ExactMatch,
}

impl std::fmt::Display for MatchClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MatchClass::NoMatch => "no_match",
            MatchClass::Match => "match",
            MatchClass::ExactMatch => "exact_match",
        };
        f.write_str(s)
    }
}

/// Symmetric best-match average of concept similarities over the two
/// interest sets. Returns 0 if either set is empty; 1 exactly when the sets
/// are equal.
pub fn profile_similarity(
    p: &Profile,
    q: &Profile,
    taxonomy: &Taxonomy,
) -> Result<f64, MatchmakingError> {
    if p.interests.is_empty() || q.interests.is_empty() {
        return Ok(0.0);
    }
    let best_against = |from: &BTreeSet<ConceptId>,
                        to: &BTreeSet<ConceptId>|
     -> Result<f64, MatchmakingError> {
        let mut sum = 0.0;
        for &a in from {
            let mut best = 0.0f64;
            for &b in to {
                let s = taxonomy.concept_similarity(a, b)?;
                if s > best {
                    best = s;
                }
            }
            sum += best;
        }
        Ok(sum)
    };
    let total = best_against(&p.interests, &q.interests)? + best_against(&q.interests, &p.interests)?;
    Ok(total / (p.interests.len() + q.interests.len()) as f64)
}

/// 1 within the near radius, exponential decay beyond it. Continuous and
/// non-increasing in `distance_m`.
pub fn proximity_factor(distance_m: f64, params: &MatchParams) -> Result<f64, MatchmakingError> {
    if !distance_m.is_finite() || distance_m < 0.0 {
        return Err(MatchmakingError::DomainError(format!(
            "distance must be finite and >= 0, got {distance_m}"
        )));
    }
    if distance_m <= params.near_radius_m {
        Ok(1.0)
    } else {
        Ok((-(distance_m - params.near_radius_m) / params.decay_length_m).exp())
    }
}

/// Combined relevance of `reference` as seen by `monitor` at `distance_m`.
/// Symmetric in the two profiles.
pub fn relevance(
    monitor: &Profile,
    reference: &Profile,
    distance_m: f64,
    taxonomy: &Taxonomy,
    params: &MatchParams,
) -> Result<RelevanceScore, MatchmakingError> {
    let similarity = profile_similarity(monitor, reference, taxonomy)?;
    let proximity = proximity_factor(distance_m, params)?;
    Ok(RelevanceScore {
        value: similarity * proximity,
        profile_similarity: similarity,
        proximity_factor: proximity,
        observer_distance_m: distance_m,
    })
}

/// Classifies a relevance score; the match threshold is inclusive.
pub fn is_match(score: &RelevanceScore, params: &MatchParams) -> MatchClass {
    if score.value >= params.exact_match_floor {
        MatchClass::ExactMatch
    } else if score.value >= params.match_threshold {
        MatchClass::Match
    } else {
        MatchClass::NoMatch
    }
}

/// Scores every candidate against `monitor` and returns them ordered by
/// descending relevance, ties broken by ascending person id. The monitor's
/// own person id is excluded if present among the candidates.
pub fn rank_candidates(
    monitor: &Profile,
    candidates: &[(Profile, f64)],
    taxonomy: &Taxonomy,
    params: &MatchParams,
) -> Result<Vec<(PersonId, RelevanceScore)>, MatchmakingError> {
    let mut scored = Vec::with_capacity(candidates.len());
    for (profile, distance) in candidates {
        if profile.person_id == monitor.person_id {
            continue;
        }
        let score = relevance(monitor, profile, *distance, taxonomy, params)?;
        scored.push((profile.person_id, score));
    }
    scored.sort_by(|a, b| {
        b.1.value
            .partial_cmp(&a.1.value)
            .expect("relevance values are finite")
            .then(a.0.cmp(&b.0))
    });
    Ok(scored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn music_sport() -> (Taxonomy, ConceptId, ConceptId) {
        let mut t = Taxonomy::new("Interest");
        let music = t.add_concept(t.root(), "Music").unwrap();
        let sport = t.add_concept(t.root(), "Sport").unwrap();
        let jazz = t.add_concept(music, "Jazz").unwrap();
        t.add_concept(music, "Rock").unwrap();
        let soccer = t.add_concept(sport, "Soccer").unwrap();
        (t, jazz, soccer)
    }

    fn profile(id: u64, interests: &[ConceptId]) -> Profile {
        Profile {
            person_id: PersonId(id),
            name: format!("p{id}"),
            age: 20,
            gender: Gender::Unspecified,
            interests: interests.iter().copied().collect(),
            context: DynamicContext::default(),
        }
    }

    #[test]
    fn identical_interest_sets_score_one() {
        let (t, jazz, soccer) = music_sport();
        let p = profile(1, &[jazz, soccer]);
        let q = profile(2, &[jazz, soccer]);
        assert_eq!(profile_similarity(&p, &q, &t).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_single_interests_score_one_third() {
        let (t, jazz, soccer) = music_sport();
        let p = profile(1, &[jazz]);
        let q = profile(2, &[soccer]);
        let s = profile_similarity(&p, &q, &t).unwrap();
        assert!((s - 1.0 / 3.0).abs() < 1e-12, "similarity = {s}");
    }

    #[test]
    fn empty_interest_set_scores_zero() {
        let (t, jazz, _) = music_sport();
        let p = profile(1, &[jazz]);
        let q = profile(2, &[]);
        assert_eq!(profile_similarity(&p, &q, &t).unwrap(), 0.0);
    }

    #[test]
    fn proximity_factor_examples() {
        let params = MatchParams::default();
        assert_eq!(proximity_factor(0.0, &params).unwrap(), 1.0);
        assert_eq!(proximity_factor(10.0, &params).unwrap(), 1.0);
        let f = proximity_factor(110.0, &params).unwrap();
        assert!((f - (-1.0f64).exp()).abs() < 1e-12, "factor = {f}");
        assert!(proximity_factor(-1.0, &params).is_err());
    }

    #[test]
    fn relevance_examples() {
        let (t, jazz, soccer) = music_sport();
        let params = MatchParams::default();
        let p = profile(1, &[jazz, soccer]);
        let q = profile(2, &[jazz, soccer]);
        let near = relevance(&p, &q, 0.0, &t, &params).unwrap();
        assert!(near.value >= 0.9999);
        assert_eq!(near.value, 1.0);
        assert_eq!(is_match(&near, &params), MatchClass::ExactMatch);

        let far = relevance(&p, &q, 110.0, &t, &params).unwrap();
        assert!((far.value - (-1.0f64).exp()).abs() < 1e-12);

        let pj = profile(1, &[jazz]);
        let qs = profile(2, &[soccer]);
        let cross = relevance(&pj, &qs, 0.0, &t, &params).unwrap();
        assert!((cross.value - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(is_match(&cross, &params), MatchClass::NoMatch);
    }

    #[test]
    fn match_threshold_is_inclusive() {
        let params = MatchParams::default();
        let score = |v: f64| RelevanceScore {
            value: v,
            profile_similarity: v,
            proximity_factor: 1.0,
            observer_distance_m: 0.0,
        };
        assert_eq!(is_match(&score(1.0), &params), MatchClass::ExactMatch);
        assert_eq!(is_match(&score(0.75), &params), MatchClass::Match);
        assert_eq!(is_match(&score(1.0 / 3.0), &params), MatchClass::NoMatch);
    }

    #[test]
    fn rank_orders_by_value_then_person_id() {
        let (t, jazz, soccer) = music_sport();
        let params = MatchParams::default();
        let monitor = profile(0, &[jazz]);
        let twin = profile(2, &[jazz]);
        let other = profile(1, &[soccer]);
        let ranked = rank_candidates(
            &monitor,
            &[(other.clone(), 0.0), (twin.clone(), 0.0)],
            &t,
            &params,
        )
        .unwrap();
        assert_eq!(ranked.len(), 2);
        assert_eq!(ranked[0].0, PersonId(2));
        assert_eq!(ranked[1].0, PersonId(1));

        // Equal values: ordered by ascending person id.
        let twin_b = profile(5, &[jazz]);
        let ranked = rank_candidates(
            &monitor,
            &[(twin_b, 0.0), (twin.clone(), 0.0)],
            &t,
            &params,
        )
        .unwrap();
        assert_eq!(ranked[0].0, PersonId(2));
        assert_eq!(ranked[1].0, PersonId(5));

        // Monitor itself excluded; empty input stays empty.
        let ranked = rank_candidates(&monitor, &[(monitor.clone(), 0.0)], &t, &params).unwrap();
        assert!(ranked.is_empty());
        assert!(rank_candidates(&monitor, &[], &t, &params).unwrap().is_empty());
    }

    #[test]
    fn profile_doc_resolution() {
        let (t, jazz, _) = music_sport();
        let doc: ProfileDoc = serde_json::from_str(
            r#"{"name":"Nkechi","age":22,"gender":"female","interests":["Music/Jazz"]}"#,
        )
        .unwrap();
        let p = doc.resolve(&t, PersonId(7)).unwrap();
        assert_eq!(p.person_id, PersonId(7));
        assert!(p.interests.contains(&jazz));

        let bad: ProfileDoc =
            serde_json::from_str(r#"{"name":"X","interests":["Music/Polka"]}"#).unwrap();
        assert!(matches!(
            bad.resolve(&t, PersonId(0)),
            Err(MatchmakingError::UnknownLabel(_))
        ));
    }

    fn arb_interests() -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(0u8..5, 1..4)
    }

    proptest! {
        #[test]
        fn relevance_symmetric_and_bounded(
            ia in arb_interests(),
            ib in arb_interests(),
            d in 0.0f64..500.0,
        ) {
            let (t, _, _) = music_sport();
            let ids: Vec<ConceptId> = t.concepts().collect();
            let pa = profile(1, &ia.iter().map(|&i| ids[(i as usize) % ids.len()]).collect::<Vec<_>>());
            let pb = profile(2, &ib.iter().map(|&i| ids[(i as usize) % ids.len()]).collect::<Vec<_>>());
            let params = MatchParams::default();
            let ab = relevance(&pa, &pb, d, &t, &params).unwrap();
            let ba = relevance(&pb, &pa, d, &t, &params).unwrap();
            prop_assert_eq!(ab.value, ba.value);
            prop_assert!(ab.value >= 0.0);
            prop_assert!(ab.value <= ab.profile_similarity + 1e-15);
            prop_assert!(ab.value <= 1.0);
            prop_assert!((ab.value - ab.profile_similarity * ab.proximity_factor).abs() < 1e-12);
        }

        #[test]
        fn relevance_non_increasing_in_distance(
            ia in arb_interests(),
            ib in arb_interests(),
        ) {
            let (t, _, _) = music_sport();
            let ids: Vec<ConceptId> = t.concepts().collect();
            let pa = profile(1, &ia.iter().map(|&i| ids[(i as usize) % ids.len()]).collect::<Vec<_>>());
            let pb = profile(2, &ib.iter().map(|&i| ids[(i as usize) % ids.len()]).collect::<Vec<_>>());
            let params = MatchParams::default();
            let mut prev = f64::INFINITY;
            for step in 0..=100 {
                let d = step as f64 * 5.0;
                let r = relevance(&pa, &pb, d, &t, &params).unwrap();
                prop_assert!(r.value <= prev);
                prev = r.value;
            }
        }

        #[test]
        fn self_similarity_is_one(ia in arb_interests()) {
            let (t, _, _) = music_sport();
            let ids: Vec<ConceptId> = t.concepts().collect();
            let p = profile(1, &ia.iter().map(|&i| ids[(i as usize) % ids.len()]).collect::<Vec<_>>());
            prop_assert_eq!(profile_similarity(&p, &p, &t).unwrap(), 1.0);
        }

        #[test]
        fn adding_common_interest_never_lowers_similarity(
            ia in arb_interests(),
            ib in arb_interests(),
            extra in 0u8..5,
        ) {
            let (t, _, _) = music_sport();
            let ids: Vec<ConceptId> = t.concepts().collect();
            let common = ids[(extra as usize) % ids.len()];
            let mut sa: BTreeSet<ConceptId> = ia.iter().map(|&i| ids[(i as usize) % ids.len()]).collect();
            let mut sb: BTreeSet<ConceptId> = ib.iter().map(|&i| ids[(i as usize) % ids.len()]).collect();
            let pa = Profile { interests: sa.clone(), ..profile(1, &[]) };
            let pb = Profile { interests: sb.clone(), ..profile(2, &[]) };
            let before = profile_similarity(&pa, &pb, &t).unwrap();
            sa.insert(common);
            sb.insert(common);
            let qa = Profile { interests: sa, ..profile(1, &[]) };
            let qb = Profile { interests: sb, ..profile(2, &[]) };
            let after = profile_similarity(&qa, &qb, &t).unwrap();
            prop_assert!(after >= before - 1e-12, "after={after} before={before}");
        }

        #[test]
        fn classification_monotone_in_value(v1 in 0.0f64..1.0, v2 in 0.0f64..1.0) {
            let params = MatchParams::default();
            let s = |v: f64| RelevanceScore {
                value: v, profile_similarity: v, proximity_factor: 1.0, observer_distance_m: 0.0,
            };
            let (hi, lo) = if v1 >= v2 { (v1, v2) } else { (v2, v1) };
            prop_assert!(is_match(&s(hi), &params) >= is_match(&s(lo), &params));
        }
    }
}
