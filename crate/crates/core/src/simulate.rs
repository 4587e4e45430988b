//! Synthetic logit streams for tests and demos.
//!
//! Each record draws a truth class, then per-modality logits as Gaussian
//! noise with a location boost on the class that channel argues for.
//! Knobs cover the interesting failure modes: per-modality dropout and
//! reliability, a disagreement rate that makes the text channel argue for
//! neutral instead of the truth (the sarcastic-utterance scenario), and
//! an unseen-label rate producing records whose truth lies outside the
//! taxonomy and whose logits favor no class at all.
//!
//! Generation is a pure function of (parameters, taxonomy, seed):
//! the same inputs give identical records, byte for byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::datasetio::{LabelTaxonomy, LogitRecord};
use crate::error::Error;
use crate::evidence::{LogitVector, Modality};

/// Per-channel knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalityProfile {
    /// Probability the channel is absent from a record.
    pub dropout: f64,
    /// Multiplier on the class boost; 0 makes the channel pure noise.
    pub reliability: f64,
}

impl Default for ModalityProfile {
    fn default() -> Self {
        Self {
            dropout: 0.0,
            reliability: 1.0,
        }
    }
}

/// Full parameter set for one simulated stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub count: u64,
    pub seed: u64,
    /// Location shift added to the argued class's logit.
    pub boost: f64,
    /// Standard deviation of the per-logit Gaussian noise.
    pub noise: f64,
    /// Probability that the text channel argues for neutral instead of
    /// the truth class.
    pub disagreement: f64,
    /// Probability a record's truth is `unseen_label` instead of a
    /// canonical class; such records get no boost on any channel.
    pub unseen_rate: f64,
    pub unseen_label: String,
    pub audio: ModalityProfile,
    pub video: ModalityProfile,
    pub text: ModalityProfile,
}

impl Simulation {
    pub fn new(count: u64, seed: u64) -> Self {
        Self {
            count,
            seed,
            boost: 3.0,
            noise: 1.0,
            disagreement: 0.0,
            unseen_rate: 0.0,
            unseen_label: "contempt".into(),
            audio: ModalityProfile::default(),
            video: ModalityProfile::default(),
            text: ModalityProfile::default(),
        }
    }

    fn validate(&self, taxonomy: &LabelTaxonomy) -> Result<(), Error> {
        let rates = [
            ("audio dropout", self.audio.dropout),
            ("video dropout", self.video.dropout),
            ("text dropout", self.text.dropout),
            ("disagreement", self.disagreement),
            ("unseen rate", self.unseen_rate),
        ];
        for (what, rate) in rates {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Simulation {
                    reason: format!("{what} must be in [0, 1], got {rate}"),
                });
            }
        }
        for (what, value) in [
            ("boost", self.boost),
            ("noise", self.noise),
            ("audio reliability", self.audio.reliability),
            ("video reliability", self.video.reliability),
            ("text reliability", self.text.reliability),
        ] {
            if !value.is_finite() {
                return Err(Error::Simulation {
                    reason: format!("{what} must be finite, got {value}"),
                });
            }
        }
        if self.noise < 0.0 {
            return Err(Error::Simulation {
                reason: format!("noise must be non-negative, got {}", self.noise),
            });
        }
        if self.count > 0
            && self.audio.dropout >= 1.0
            && self.video.dropout >= 1.0
            && self.text.dropout >= 1.0
        {
            return Err(Error::Simulation {
                reason: "all modalities fully dropped; records would be empty".into(),
            });
        }
        if self.unseen_rate > 0.0 {
            if self.unseen_label.trim().is_empty() {
                return Err(Error::Simulation {
                    reason: "unseen label is empty".into(),
                });
            }
            if taxonomy.class_index(&self.unseen_label).is_some() {
                return Err(Error::Simulation {
                    reason: format!(
                        "unseen label {:?} is a canonical class of the taxonomy",
                        self.unseen_label
                    ),
                });
            }
        }
        Ok(())
    }

    /// Generate the stream. Ids are `sim-00000000`, `sim-00000001`, ...
    /// so lexicographic order equals generation order.
    pub fn generate(&self, taxonomy: &LabelTaxonomy) -> Result<Vec<LogitRecord>, Error> {
        self.validate(taxonomy)?;
        let k = taxonomy.k();
        let neutral = taxonomy.neutral_index();
        let noise = Normal::new(0.0, self.noise).map_err(|err| Error::Simulation {
            reason: err.to_string(),
        })?;
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);

        let channels = [
            (Modality::Audio, self.audio, false),
            (Modality::Video, self.video, false),
            (Modality::Text, self.text, true),
        ];

        let mut records = Vec::with_capacity(self.count as usize);
        for i in 0..self.count {
            // Truth: None marks the unseen label.
            let truth: Option<usize> = if self.unseen_rate > 0.0
                && rng.gen::<f64>() < self.unseen_rate
            {
                None
            } else {
                Some(rng.gen_range(0..k))
            };

            // Redraw the dropout coins until at least one channel
            // survives; validation guarantees this terminates.
            let vectors = loop {
                let mut vectors = Vec::with_capacity(3);
                for (modality, profile, is_text) in &channels {
                    if rng.gen::<f64>() < profile.dropout {
                        continue;
                    }
                    let argued = match truth {
                        None => None,
                        Some(class) => {
                            if *is_text
                                && self.disagreement > 0.0
                                && rng.gen::<f64>() < self.disagreement
                            {
                                Some(neutral)
                            } else {
                                Some(class)
                            }
                        }
                    };
                    let values: Vec<f64> = (0..k)
                        .map(|class| {
                            let shift = if argued == Some(class) {
                                self.boost * profile.reliability
                            } else {
                                0.0
                            };
                            noise.sample(&mut rng) + shift
                        })
                        .collect();
                    vectors.push(LogitVector::new(modality.clone(), values)?);
                }
                if !vectors.is_empty() {
                    break vectors;
                }
            };

            let label = match truth {
                Some(class) => taxonomy.class_name(class).to_string(),
                None => self.unseen_label.trim().to_lowercase(),
            };
            records.push(LogitRecord::new(
                format!("sim-{i:08}"),
                vectors,
                Some(label),
                Default::default(),
            )?);
        }
        Ok(records)
    }
}
