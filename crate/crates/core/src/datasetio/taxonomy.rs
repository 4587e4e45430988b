//! Canonical class lists, the neutral class, and alias resolution for
//! external label vocabularies.

use std::collections::BTreeMap;

use crate::error::Error;

/// Where an alias points: a canonical class, or the explicit marker that
/// the label exists in some dataset but is not predictable here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AliasTarget {
    Class(String),
    Unseen,
}

/// A ground-truth label after resolution against a taxonomy.
///
/// `Unseen` labels are evaluable (they get their own confusion rows and a
/// fallback rate) but can never be predicted, since predictions index the
/// canonical class list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundTruth {
    /// Index into the taxonomy's canonical class list.
    Known(usize),
    /// Normalized label text of a class outside the taxonomy.
    Unseen(String),
}

/// The class vocabulary: ordered canonical names, which one is neutral,
/// and an alias table mapping external labels onto the canon.
///
/// Class names are case-insensitive and canonicalized to lowercase.
/// The default taxonomy is the seven-class emotion set with the usual
/// dataset vocabulary aliases (happy→joy, sad→sadness, ...); `calm` and
/// `contempt` are aliased to unseen because no class here models them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTaxonomy {
    classes: Vec<String>,
    neutral_index: usize,
    /// label → Some(class index) or None for the unseen marker.
    aliases: BTreeMap<String, Option<usize>>,
}

fn normalize(label: &str) -> String {
    label.trim().to_lowercase()
}

impl LabelTaxonomy {
    /// Build a taxonomy with no aliases. Names are trimmed and
    /// lowercased; they must be non-empty and unique, there must be at
    /// least two, and `neutral` must be one of them.
    pub fn new<S: AsRef<str>>(classes: &[S], neutral: &str) -> Result<Self, Error> {
        let classes: Vec<String> = classes.iter().map(|c| normalize(c.as_ref())).collect();
        if classes.len() < 2 {
            return Err(Error::Taxonomy {
                reason: format!("need at least 2 classes, got {}", classes.len()),
            });
        }
        for (i, name) in classes.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::Taxonomy {
                    reason: format!("class {} has an empty name", i),
                });
            }
            if classes[..i].contains(name) {
                return Err(Error::Taxonomy {
                    reason: format!("duplicate class name: {name}"),
                });
            }
        }
        let neutral = normalize(neutral);
        let neutral_index = classes
            .iter()
            .position(|c| *c == neutral)
            .ok_or_else(|| Error::Taxonomy {
                reason: format!("neutral class {neutral:?} is not in the class list"),
            })?;
        Ok(Self {
            classes,
            neutral_index,
            aliases: BTreeMap::new(),
        })
    }

    /// Add one alias; rejects aliases that shadow a canonical class name,
    /// double definitions, and targets that are not classes.
    pub fn with_alias(mut self, label: &str, target: AliasTarget) -> Result<Self, Error> {
        let label = normalize(label);
        if label.is_empty() {
            return Err(Error::Taxonomy {
                reason: "alias with empty label".into(),
            });
        }
        if self.classes.contains(&label) {
            return Err(Error::Taxonomy {
                reason: format!("alias {label:?} shadows a canonical class"),
            });
        }
        if self.aliases.contains_key(&label) {
            return Err(Error::Taxonomy {
                reason: format!("alias {label:?} defined twice"),
            });
        }
        let resolved = match target {
            AliasTarget::Unseen => None,
            AliasTarget::Class(name) => {
                let name = normalize(&name);
                let index = self.class_index(&name).ok_or_else(|| Error::Taxonomy {
                    reason: format!("alias {label:?} points to unknown class {name:?}"),
                })?;
                Some(index)
            }
        };
        self.aliases.insert(label, resolved);
        Ok(self)
    }

    /// Parse the key-value taxonomy config format:
    ///
    /// ```text
    /// # comment
    /// classes = anger, disgust, fear, joy, neutral, sadness, surprise
    /// neutral = neutral
    /// alias.happy = joy
    /// alias.calm = unseen
    /// ```
    ///
    /// `classes` and `neutral` are required and may appear once each;
    /// in an alias the target `unseen` is the reserved marker.
    pub fn from_config(text: &str) -> Result<Self, Error> {
        let mut classes: Option<Vec<String>> = None;
        let mut neutral: Option<String> = None;
        let mut aliases: Vec<(String, AliasTarget)> = Vec::new();

        for (number, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Taxonomy {
                reason: format!("line {}: expected key = value, got {line:?}", number + 1),
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "classes" => {
                    if classes.is_some() {
                        return Err(Error::Taxonomy {
                            reason: format!("line {}: classes defined twice", number + 1),
                        });
                    }
                    classes = Some(value.split(',').map(|c| c.trim().to_string()).collect());
                }
                "neutral" => {
                    if neutral.is_some() {
                        return Err(Error::Taxonomy {
                            reason: format!("line {}: neutral defined twice", number + 1),
                        });
                    }
                    neutral = Some(value.to_string());
                }
                _ => match key.strip_prefix("alias.") {
                    Some(label) => {
                        let target = if normalize(value) == "unseen" {
                            AliasTarget::Unseen
                        } else {
                            AliasTarget::Class(value.to_string())
                        };
                        aliases.push((label.trim().to_string(), target));
                    }
                    None => {
                        return Err(Error::Taxonomy {
                            reason: format!("line {}: unknown key {key:?}", number + 1),
                        });
                    }
                },
            }
        }

        let classes = classes.ok_or_else(|| Error::Taxonomy {
            reason: "missing required key: classes".into(),
        })?;
        let neutral = neutral.ok_or_else(|| Error::Taxonomy {
            reason: "missing required key: neutral".into(),
        })?;

        let mut taxonomy = Self::new(&classes, &neutral)?;
        for (label, target) in aliases {
            taxonomy = taxonomy.with_alias(&label, target)?;
        }
        Ok(taxonomy)
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_name(&self, index: usize) -> &str {
        &self.classes[index]
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        let name = normalize(name);
        self.classes.iter().position(|c| *c == name)
    }

    pub fn neutral_index(&self) -> usize {
        self.neutral_index
    }

    pub fn neutral_name(&self) -> &str {
        &self.classes[self.neutral_index]
    }

    /// Map an external label onto the taxonomy: canonical names first,
    /// then the alias table, and anything else is unseen under its
    /// normalized spelling.
    pub fn resolve(&self, label: &str) -> GroundTruth {
        let normalized = normalize(label);
        if let Some(index) = self.classes.iter().position(|c| *c == normalized) {
            return GroundTruth::Known(index);
        }
        match self.aliases.get(&normalized) {
            Some(Some(index)) => GroundTruth::Known(*index),
            Some(None) | None => GroundTruth::Unseen(normalized),
        }
    }
}

impl Default for LabelTaxonomy {
    fn default() -> Self {
        let base = Self::new(
            &[
                "anger", "disgust", "fear", "joy", "neutral", "sadness", "surprise",
            ],
            "neutral",
        )
        .expect("default class list is valid");
        [
            ("happy", AliasTarget::Class("joy".into())),
            ("happiness", AliasTarget::Class("joy".into())),
            ("sad", AliasTarget::Class("sadness".into())),
            ("angry", AliasTarget::Class("anger".into())),
            ("calm", AliasTarget::Unseen),
            ("contempt", AliasTarget::Unseen),
            ("fearful", AliasTarget::Class("fear".into())),
            ("surprised", AliasTarget::Class("surprise".into())),
        ]
        .into_iter()
        .fold(base, |taxonomy, (label, target)| {
            taxonomy
                .with_alias(label, target)
                .expect("default aliases are valid")
        })
    }
}
