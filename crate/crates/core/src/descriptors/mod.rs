//! MPEG-7 visual descriptors: Edge Histogram (texture), Scalable Color and
//! Color Layout (color).

mod cld;
mod ehd;
mod scd;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::RasterImage;

pub use cld::{dct_2d, extract_cld_raw, idct_2d, ZIGZAG};
pub use ehd::{block_edge_class, ehd_block_size, extract_ehd, EdgeClass, EhdParams};
pub use scd::{extract_scd, haar_1d, haar_1d_inverse, scd_bin, scd_histogram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DescriptorKind {
    #[serde(rename = "EHD")]
    Ehd,
    #[serde(rename = "SCD")]
    Scd,
    #[serde(rename = "CLD_RAW")]
    CldRaw,
    #[serde(rename = "CLD_REDUCED")]
    CldReduced,
}

impl DescriptorKind {
    pub const fn dim(self) -> usize {
        match self {
            DescriptorKind::Ehd => 80,
            DescriptorKind::Scd => 256,
            DescriptorKind::CldRaw => 192,
            DescriptorKind::CldReduced => 64,
        }
    }

    pub const fn tag(self) -> &'static str {
        match self {
            DescriptorKind::Ehd => "EHD",
            DescriptorKind::Scd => "SCD",
            DescriptorKind::CldRaw => "CLD_RAW",
            DescriptorKind::CldReduced => "CLD_REDUCED",
        }
    }

    /// Short lowercase name used on the command line and in report keys.
    pub const fn cli_name(self) -> &'static str {
        match self {
            DescriptorKind::Ehd => "ehd",
            DescriptorKind::Scd => "scd",
            DescriptorKind::CldRaw | DescriptorKind::CldReduced => "cld",
        }
    }
}

impl fmt::Display for DescriptorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for DescriptorKind {
    type Err = Error;

    /// Accepts the table tags (`EHD`, `CLD_RAW`, ...) and the CLI names
    /// (`ehd`, `scd`, `cld`); `cld` means the raw 192-value layout.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "EHD" | "ehd" => Ok(DescriptorKind::Ehd),
            "SCD" | "scd" => Ok(DescriptorKind::Scd),
            "CLD_RAW" | "cld" => Ok(DescriptorKind::CldRaw),
            "CLD_REDUCED" => Ok(DescriptorKind::CldReduced),
            other => Err(Error::InvalidArgument(format!("unknown descriptor {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    kind: DescriptorKind,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(kind: DescriptorKind, values: Vec<f64>) -> Result<Self> {
        if values.len() != kind.dim() {
            return Err(Error::DimensionMismatch {
                expected: kind.dim(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{kind} vector has non-finite values")));
        }
        Ok(Self { kind, values })
    }

    pub fn kind(&self) -> DescriptorKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Extracts the descriptor of `kind` from an RGB image. `CldReduced` needs a
/// fitted PCA model and cannot be produced from a single image.
pub fn extract(img: &RasterImage, kind: DescriptorKind, params: &EhdParams) -> Result<FeatureVector> {
    match kind {
        DescriptorKind::Ehd => extract_ehd(img, params),
        DescriptorKind::Scd => extract_scd(img),
        DescriptorKind::CldRaw => extract_cld_raw(img),
        DescriptorKind::CldReduced => Err(Error::InvalidArgument(
            "CLD_REDUCED is produced by projecting CLD_RAW through a PCA model".into(),
        )),
    }
}
