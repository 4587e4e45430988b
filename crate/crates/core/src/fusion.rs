//! Dempster-Shafer combination of opinions and recovery of fused
//! class probabilities.
//!
//! Two opinions over the same K classes are combined with the reduced
//! Dempster rule for frames whose focal sets are the K singletons plus
//! the whole frame:
//!
//! ```text
//! c          = sum over i != j of b1_i * b2_j          (conflict factor)
//! fused b_k  = (b1_k * b2_k + b1_k * u2 + b2_k * u1) / (1 - c)
//! fused u    = u1 * u2 / (1 - c)
//! ```
//!
//! The rule is commutative and associative, combining with the vacuous
//! opinion is an exact identity, and the fused uncertainty never exceeds
//! either input uncertainty. More than two modalities are folded left to
//! right. The fused opinion converts back to Dirichlet parameters through
//! the uncertainty (`strength = K / u`, `e_k = b_k * strength`,
//! `alpha_k = e_k + 1`) and finally to class probabilities
//! `p_k = alpha_k / strength`.
//!
//! [`ds_combine_oracle`] re-derives the same combination by brute-force
//! enumeration of focal-set pairs. It shares no code with [`ds_combine`]
//! and exists so the closed form can be checked against first principles.

use crate::datasetio::LogitRecord;
use crate::error::Error;
use crate::evidence::{
    dirichlet_to_opinion, evidence_to_dirichlet, extract_evidence, DirichletParams, Mitigation,
    Modality, Opinion,
};

/// Guard on `1 - c`; below this the combination is treated as total
/// conflict. Unreachable for valid opinions (positive uncertainty keeps
/// mass on the frame), so hitting it signals corrupted input.
pub const TOTAL_CONFLICT_THRESHOLD: f64 = 1e-12;

/// Guard on the fused uncertainty when recovering Dirichlet parameters;
/// `strength = K / u` must stay finite and meaningful.
pub const DEGENERATE_UNCERTAINTY_THRESHOLD: f64 = 1e-12;

/// Everything produced by fusing one record.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionResult {
    /// Combined opinion across all informative modalities.
    pub fused: Opinion,
    /// Final class probabilities, `alpha_k / strength`; sums to one.
    pub probabilities: Vec<f64>,
    /// Dirichlet parameters recovered from the fused opinion.
    pub dirichlet: DirichletParams,
    /// The informative (non-vacuous) inputs in the order they were folded.
    pub per_modality: Vec<(Modality, Opinion)>,
    /// Conflict factor of each pairwise combination step, in fold order.
    pub conflict_trace: Vec<f64>,
}

fn check_k(first: &Opinion, second: &Opinion) -> Result<(), Error> {
    if first.k() != second.k() {
        return Err(Error::DimensionMismatch {
            expected: first.k(),
            got: second.k(),
        });
    }
    Ok(())
}

/// Combine two opinions with the closed-form rule; returns the fused
/// opinion and the conflict factor of this step.
pub fn ds_combine(first: &Opinion, second: &Opinion) -> Result<(Opinion, f64), Error> {
    check_k(first, second)?;
    // A vacuous operand carries no information and must leave the other
    // side bit-identical, so skip the renormalizing division entirely.
    if second.is_vacuous() {
        return Ok((first.clone(), 0.0));
    }
    if first.is_vacuous() {
        return Ok((second.clone(), 0.0));
    }
    let b1 = first.beliefs();
    let b2 = second.beliefs();
    let u1 = first.uncertainty();
    let u2 = second.uncertainty();

    let mut conflict = 0.0;
    for (i, &bi) in b1.iter().enumerate() {
        for (j, &bj) in b2.iter().enumerate() {
            if i != j {
                conflict += bi * bj;
            }
        }
    }

    let numerators: Vec<f64> = b1
        .iter()
        .zip(b2)
        .map(|(&x, &y)| x * y + x * u2 + y * u1)
        .collect();
    let frame = u1 * u2;
    // The retained mass sums to exactly `1 - conflict` in real arithmetic;
    // normalizing by the measured total instead keeps long fold chains on
    // the simplex rather than amplifying rounding drift by 1/(1 - c) per
    // step.
    let total = numerators.iter().sum::<f64>() + frame;
    if total < TOTAL_CONFLICT_THRESHOLD {
        return Err(Error::TotalConflict { remainder: total });
    }

    let beliefs: Vec<f64> = numerators.iter().map(|n| n / total).collect();
    let uncertainty = frame / total;

    Ok((Opinion::from_parts_unchecked(beliefs, uncertainty), conflict))
}

/// Brute-force Dempster combination used to verify [`ds_combine`].
///
/// Enumerates all `(K + 1)^2` focal-set pairs over the frame whose focal
/// sets are each singleton class (mass `b_k`) and the whole frame
/// (mass `u`); empty intersections accumulate conflict, everything else
/// lands on the intersected set, and the result is renormalized.
pub fn ds_combine_oracle(first: &Opinion, second: &Opinion) -> Result<(Opinion, f64), Error> {
    check_k(first, second)?;
    let k = first.k();

    // Focal set encoding: Some(class) is a singleton, None is the frame.
    let focals = |op: &Opinion| -> Vec<(Option<usize>, f64)> {
        let mut sets: Vec<(Option<usize>, f64)> = op
            .beliefs()
            .iter()
            .enumerate()
            .map(|(i, &mass)| (Some(i), mass))
            .collect();
        sets.push((None, op.uncertainty()));
        sets
    };

    let mut singleton_mass = vec![0.0; k];
    let mut frame_mass = 0.0;
    let mut conflict = 0.0;
    for &(set_a, mass_a) in &focals(first) {
        for &(set_b, mass_b) in &focals(second) {
            let product = mass_a * mass_b;
            match (set_a, set_b) {
                (Some(i), Some(j)) if i == j => singleton_mass[i] += product,
                (Some(_), Some(_)) => conflict += product,
                (Some(i), None) => singleton_mass[i] += product,
                (None, Some(j)) => singleton_mass[j] += product,
                (None, None) => frame_mass += product,
            }
        }
    }

    // Renormalize by the mass that survived, as in the closed form.
    let total = singleton_mass.iter().sum::<f64>() + frame_mass;
    if total < TOTAL_CONFLICT_THRESHOLD {
        return Err(Error::TotalConflict { remainder: total });
    }

    let beliefs: Vec<f64> = singleton_mass.iter().map(|m| m / total).collect();
    let uncertainty = frame_mass / total;
    Ok((Opinion::from_parts_unchecked(beliefs, uncertainty), conflict))
}

/// Recover Dirichlet parameters and class probabilities from a fused
/// opinion: `strength = K / u`, `e_k = b_k * strength`,
/// `alpha_k = e_k + 1`, `p_k = alpha_k / strength`.
pub fn opinion_to_probabilities(opinion: &Opinion) -> Result<(DirichletParams, Vec<f64>), Error> {
    let uncertainty = opinion.uncertainty();
    if uncertainty < DEGENERATE_UNCERTAINTY_THRESHOLD {
        return Err(Error::DegenerateCertainty { uncertainty });
    }
    let k = opinion.k() as f64;
    let strength = k / uncertainty;
    let alpha: Vec<f64> = opinion.beliefs().iter().map(|b| b * strength + 1.0).collect();
    let probabilities: Vec<f64> = alpha.iter().map(|a| a / strength).collect();
    let dirichlet = DirichletParams::new(alpha)?;
    Ok((dirichlet, probabilities))
}

/// Left fold of [`ds_combine`] over an ordered list of opinions.
///
/// Exactly-vacuous entries carry no information and are dropped before
/// folding, so a record with a missing modality and a record carrying an
/// explicit vacuous opinion for it produce bit-identical results. If
/// nothing informative remains the fused opinion is vacuous and the
/// probabilities are uniform.
pub fn fuse_sequence(opinions: &[(Modality, Opinion)]) -> Result<FusionResult, Error> {
    let (first, rest) = opinions.split_first().ok_or(Error::NothingToFuse)?;
    let k = first.1.k();
    for (_, op) in rest {
        if op.k() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: op.k(),
            });
        }
    }

    let informative: Vec<(Modality, Opinion)> = opinions
        .iter()
        .filter(|(_, op)| !op.is_vacuous())
        .cloned()
        .collect();

    let mut conflict_trace = Vec::new();
    let fused = match informative.split_first() {
        None => Opinion::vacuous(k),
        Some(((_, head), tail)) => {
            let mut acc = head.clone();
            for (_, op) in tail {
                let (next, conflict) = ds_combine(&acc, op)?;
                conflict_trace.push(conflict);
                acc = next;
            }
            acc
        }
    };

    let (dirichlet, probabilities) = opinion_to_probabilities(&fused)?;
    Ok(FusionResult {
        fused,
        probabilities,
        dirichlet,
        per_modality: informative,
        conflict_trace,
    })
}

/// End-to-end fusion of one record in canonical modality order
/// (audio, video, text, then custom channels by name).
pub fn fuse_record(record: &LogitRecord, mode: Mitigation) -> Result<FusionResult, Error> {
    fuse_record_ordered(record, mode, &[])
}

/// End-to-end fusion with an explicit fold order.
///
/// `order` lists modalities to fold first, in that order; present
/// modalities it does not mention follow in canonical order. Entries for
/// absent modalities are skipped. Associativity makes the fused result
/// order-independent up to round-off; the order only affects how the
/// conflict trace reads.
pub fn fuse_record_ordered(
    record: &LogitRecord,
    mode: Mitigation,
    order: &[Modality],
) -> Result<FusionResult, Error> {
    let evidence = extract_evidence(record.logits(), mode)?;

    let mut sequence: Vec<Modality> = Vec::with_capacity(evidence.len());
    for modality in order {
        if evidence.contains_key(modality) && !sequence.contains(modality) {
            sequence.push(modality.clone());
        }
    }
    for modality in evidence.keys() {
        if !sequence.contains(modality) {
            sequence.push(modality.clone());
        }
    }

    let opinions: Vec<(Modality, Opinion)> = sequence
        .into_iter()
        .map(|modality| {
            let opinion = dirichlet_to_opinion(&evidence_to_dirichlet(&evidence[&modality]));
            (modality, opinion)
        })
        .collect();

    fuse_sequence(&opinions)
}
