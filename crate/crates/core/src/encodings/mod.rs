//! Genome encodings behind one interface: random initialization, decoding
//! to a [`HeightGrid`] and mutation.

pub mod ca;
pub mod cppn;
pub mod dictionary;
pub mod direct;
pub mod parametric;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use ca::{CaConfig, CaGenome};
pub use cppn::{Activation, CppnConfig, CppnGenome};
pub use dictionary::{DictionaryConfig, DictionaryGenome};
pub use direct::{DirectConfig, DirectGenome};
pub use parametric::{ParametricConfig, ParametricGenome, Rect};

use crate::error::{Error, Result};
use crate::phenotype::{GridShape, HeightGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingTag {
    Direct,
    Dictionary,
    Parametric,
    Cppn,
    Ca,
}

impl EncodingTag {
    pub const ALL: [EncodingTag; 5] = [
        EncodingTag::Direct,
        EncodingTag::Dictionary,
        EncodingTag::Parametric,
        EncodingTag::Cppn,
        EncodingTag::Ca,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EncodingTag::Direct => "direct",
            EncodingTag::Dictionary => "dictionary",
            EncodingTag::Parametric => "parametric",
            EncodingTag::Cppn => "cppn",
            EncodingTag::Ca => "ca",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EncodingTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "encoding_tag", rename_all = "snake_case")]
pub enum Genome {
    Direct(DirectGenome),
    Dictionary(DictionaryGenome),
    Parametric(ParametricGenome),
    Cppn(CppnGenome),
    Ca(CaGenome),
}

impl Genome {
    pub fn tag(&self) -> EncodingTag {
        match self {
            Genome::Direct(_) => EncodingTag::Direct,
            Genome::Dictionary(_) => EncodingTag::Dictionary,
            Genome::Parametric(_) => EncodingTag::Parametric,
            Genome::Cppn(_) => EncodingTag::Cppn,
            Genome::Ca(_) => EncodingTag::Ca,
        }
    }
}

/// Encoding choice plus its hyperparameters, as written in config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EncodingConfig {
    Direct(DirectConfig),
    Dictionary(DictionaryConfig),
    Parametric(ParametricConfig),
    Cppn(CppnConfig),
    Ca(CaConfig),
}

impl EncodingConfig {
    pub fn default_for(tag: EncodingTag) -> Self {
        match tag {
            EncodingTag::Direct => EncodingConfig::Direct(DirectConfig::default()),
            EncodingTag::Dictionary => EncodingConfig::Dictionary(DictionaryConfig::default()),
            EncodingTag::Parametric => EncodingConfig::Parametric(ParametricConfig::default()),
            EncodingTag::Cppn => EncodingConfig::Cppn(CppnConfig::default()),
            EncodingTag::Ca => EncodingConfig::Ca(CaConfig::default()),
        }
    }

    pub fn tag(&self) -> EncodingTag {
        match self {
            EncodingConfig::Direct(_) => EncodingTag::Direct,
            EncodingConfig::Dictionary(_) => EncodingTag::Dictionary,
            EncodingConfig::Parametric(_) => EncodingTag::Parametric,
            EncodingConfig::Cppn(_) => EncodingTag::Cppn,
            EncodingConfig::Ca(_) => EncodingTag::Ca,
        }
    }

    pub fn p_mut(&self) -> f64 {
        match self {
            EncodingConfig::Direct(c) => c.p_mut,
            EncodingConfig::Dictionary(c) => c.p_mut,
            EncodingConfig::Parametric(c) => c.p_mut,
            EncodingConfig::Cppn(c) => c.p_mut,
            EncodingConfig::Ca(c) => c.p_mut,
        }
    }

    /// Checks hyperparameter ranges. Field names in errors are relative to
    /// this encoding entry.
    pub fn validate(&self) -> Result<()> {
        let p = self.p_mut();
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::config("p_mut", format!("must lie in [0, 1], got {p}")));
        }
        let check_sigma = |sigma: f64| {
            if sigma > 0.0 && sigma.is_finite() {
                Ok(())
            } else {
                Err(Error::config("sigma", format!("must be positive, got {sigma}")))
            }
        };
        match self {
            EncodingConfig::Direct(_) => Ok(()),
            EncodingConfig::Dictionary(c) => dictionary::check_block(c.block_rows, c.block_cols),
            EncodingConfig::Parametric(c) => check_sigma(c.sigma),
            EncodingConfig::Cppn(c) => {
                check_sigma(c.sigma)?;
                if !(1..=2).contains(&c.hidden_layers) {
                    return Err(Error::config("hidden_layers", "must be 1 or 2"));
                }
                if c.hidden_neurons == 0 {
                    return Err(Error::config("hidden_neurons", "must be positive"));
                }
                if !(c.thresholds[0] <= c.thresholds[1] && c.thresholds[1] <= c.thresholds[2]) {
                    return Err(Error::config("thresholds", "must be ascending"));
                }
                Ok(())
            }
            EncodingConfig::Ca(c) => {
                check_sigma(c.sigma)?;
                ca::check_mask_size(c.mask_size)
            }
        }
    }
}

/// A validated encoding bound to a grid shape, with any lookup tables it
/// needs prepared up front.
#[derive(Clone, Debug)]
pub struct Encoder {
    config: EncodingConfig,
    shape: GridShape,
    layout: Option<dictionary::Layout>,
}

impl Encoder {
    pub fn new(config: EncodingConfig, shape: GridShape) -> Result<Self> {
        config.validate()?;
        if shape.cells() == 0 {
            return Err(Error::config("shape", "grid must have at least one cell"));
        }
        let layout = match &config {
            EncodingConfig::Dictionary(c) => {
                Some(dictionary::Layout::new(shape, c.block_rows, c.block_cols)?)
            }
            _ => None,
        };
        Ok(Encoder {
            config,
            shape,
            layout,
        })
    }

    pub fn config(&self) -> &EncodingConfig {
        &self.config
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn tag(&self) -> EncodingTag {
        self.config.tag()
    }

    fn layout(&self) -> &dictionary::Layout {
        self.layout.as_ref().expect("dictionary encoder has a layout")
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        match &self.config {
            EncodingConfig::Direct(_) => Genome::Direct(direct::random(self.shape, rng)),
            EncodingConfig::Dictionary(_) => Genome::Dictionary(self.layout().random(rng)),
            EncodingConfig::Parametric(c) => {
                Genome::Parametric(parametric::random(c.rectangles, self.shape, rng))
            }
            EncodingConfig::Cppn(c) => {
                Genome::Cppn(cppn::random(c.hidden_layers, c.hidden_neurons, rng))
            }
            EncodingConfig::Ca(c) => Genome::Ca(
                ca::random(c.mask_size, self.shape, rng).expect("mask size checked on construction"),
            ),
        }
    }

    /// Decodes a genome of this encoder's kind.
    ///
    /// Panics when handed a genome of another encoding.
    pub fn decode(&self, genome: &Genome) -> HeightGrid {
        match (&self.config, genome) {
            (EncodingConfig::Direct(_), Genome::Direct(g)) => direct::decode(g, self.shape),
            (EncodingConfig::Dictionary(_), Genome::Dictionary(g)) => {
                self.layout().decode(g, self.shape)
            }
            (EncodingConfig::Parametric(_), Genome::Parametric(g)) => {
                parametric::decode(g, self.shape)
            }
            (EncodingConfig::Cppn(c), Genome::Cppn(g)) => {
                cppn::decode(g, &c.thresholds, self.shape)
            }
            (EncodingConfig::Ca(c), Genome::Ca(g)) => ca::decode(g, c.steps, self.shape),
            _ => panic!("{} encoder cannot decode a {} genome", self.tag(), genome.tag()),
        }
    }

    /// Returns a mutated copy; the parent is untouched.
    ///
    /// Panics when handed a genome of another encoding.
    pub fn mutate<R: Rng + ?Sized>(&self, genome: &Genome, rng: &mut R) -> Genome {
        match (&self.config, genome) {
            (EncodingConfig::Direct(c), Genome::Direct(g)) => {
                Genome::Direct(direct::mutate(g, c.p_mut, rng))
            }
            (EncodingConfig::Dictionary(c), Genome::Dictionary(g)) => {
                Genome::Dictionary(self.layout().mutate(g, c.p_mut, rng))
            }
            (EncodingConfig::Parametric(c), Genome::Parametric(g)) => Genome::Parametric(
                parametric::mutate(g, c.p_mut, c.sigma, self.shape, rng),
            ),
            (EncodingConfig::Cppn(c), Genome::Cppn(g)) => {
                Genome::Cppn(cppn::mutate(g, c.p_mut, c.sigma, rng))
            }
            (EncodingConfig::Ca(c), Genome::Ca(g)) => {
                Genome::Ca(ca::mutate(g, c.p_mut, c.sigma, self.shape, rng))
            }
            _ => panic!("{} encoder cannot mutate a {} genome", self.tag(), genome.tag()),
        }
    }

    /// Degrees of freedom of the genome.
    pub fn dimensionality(&self) -> usize {
        match &self.config {
            EncodingConfig::Direct(_) => self.shape.cells(),
            EncodingConfig::Dictionary(_) => self.layout().groups.len(),
            EncodingConfig::Parametric(c) => 4 * c.rectangles,
            EncodingConfig::Cppn(c) => {
                cppn::weight_count(c.hidden_layers, c.hidden_neurons)
                    + c.hidden_layers * c.hidden_neurons
            }
            EncodingConfig::Ca(c) => c.mask_size * c.mask_size + 2,
        }
    }

    /// Whether `genome` satisfies every invariant of this encoding.
    pub fn is_valid(&self, genome: &Genome) -> bool {
        match (&self.config, genome) {
            (EncodingConfig::Direct(_), Genome::Direct(g)) => {
                g.heights.len() == self.shape.cells() && g.heights.iter().all(|&h| h <= 3)
            }
            (EncodingConfig::Dictionary(_), Genome::Dictionary(g)) => self.layout().is_valid(g),
            (EncodingConfig::Parametric(c), Genome::Parametric(g)) => {
                g.rectangles.len() == c.rectangles
                    && g.rectangles.iter().all(|r| r.fits(self.shape))
            }
            (EncodingConfig::Cppn(c), Genome::Cppn(g)) => {
                g.is_valid() && g.hidden_layers == c.hidden_layers && g.hidden_neurons == c.hidden_neurons
            }
            (EncodingConfig::Ca(c), Genome::Ca(g)) => {
                g.is_valid(self.shape) && g.mask_size == c.mask_size
            }
            _ => false,
        }
    }
}
