//! Angle-as-classification encodings over the long-edge range `[-90, 90)`.
//!
//! * CSL (circular smooth label): one bin per `180 / num_bins` degrees, with a
//!   window function spread around the target bin that wraps across ±90.
//! * DCL (dense coded label): `2^n` bins, the bin index written as `n` bits,
//!   plain binary (BCL) or reflected Gray (GCL), most significant bit first.
//!
//! Both decoders return the bin center.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Window {
    #[default]
    Gaussian,
    Triangle,
    Rectangle,
    Pulse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CslConfig {
    pub num_bins: usize,
    pub window: Window,
    /// Window radius in bins.
    pub radius: usize,
}

impl Default for CslConfig {
    fn default() -> Self {
        Self {
            num_bins: 180,
            window: Window::Gaussian,
            radius: 4,
        }
    }
}

impl CslConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_bins < 2 {
            return Err(Error::Config(format!("num_bins must be >= 2, got {}", self.num_bins)));
        }
        if 2 * self.radius >= self.num_bins {
            return Err(Error::Config(format!(
                "radius {} must be below num_bins / 2 = {}",
                self.radius,
                self.num_bins as f64 / 2.0
            )));
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        180.0 / self.num_bins as f64
    }

    fn window_value(&self, distance: usize) -> f64 {
        if distance == 0 {
            return 1.0;
        }
        let r = self.radius as f64;
        let d = distance as f64;
        match self.window {
            Window::Pulse => 0.0,
            _ if distance > self.radius => 0.0,
            Window::Rectangle => 1.0,
            Window::Triangle => (1.0 - d / r).max(0.0),
            Window::Gaussian => (-(d * d) / (2.0 * r * r)).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Coding {
    #[default]
    Binary,
    Gray,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DclConfig {
    pub num_bits: u32,
    pub coding: Coding,
}

impl Default for DclConfig {
    fn default() -> Self {
        Self {
            num_bits: 8,
            coding: Coding::Binary,
        }
    }
}

impl DclConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=16).contains(&self.num_bits) {
            return Err(Error::Config(format!("num_bits must be in 1..=16, got {}", self.num_bits)));
        }
        Ok(())
    }

    pub fn num_bins(&self) -> usize {
        1usize << self.num_bits
    }

    pub fn bin_width(&self) -> f64 {
        180.0 / self.num_bins() as f64
    }
}

/// Encoded angle target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AngleLabel {
    /// One value in `[0, 1]` per CSL bin.
    Dense(Vec<f64>),
    /// DCL bits, most significant first.
    Code(Vec<u8>),
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && (-90.0..90.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::Range(format!("angle {theta} outside [-90, 90)")))
    }
}

fn bin_index(theta: f64, bin_width: f64, num_bins: usize) -> usize {
    (((theta + 90.0) / bin_width).floor() as usize).min(num_bins - 1)
}

fn bin_center(index: usize, bin_width: f64) -> f64 {
    -90.0 + (index as f64 + 0.5) * bin_width
}

fn circular_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

pub fn csl_peak_bin(theta: f64, cfg: &CslConfig) -> Result<usize> {
    cfg.validate()?;
    check_theta(theta)?;
    Ok(bin_index(theta, cfg.bin_width(), cfg.num_bins))
}

pub fn csl_encode(theta: f64, cfg: &CslConfig) -> Result<AngleLabel> {
    let peak = csl_peak_bin(theta, cfg)?;
    let n = cfg.num_bins;
    Ok(AngleLabel::Dense(
        (0..n)
            .map(|k| cfg.window_value(circular_distance(k, peak, n)))
            .collect(),
    ))
}

/// Center of the arg-max bin; the smallest index wins exact ties.
pub fn csl_decode(label: &AngleLabel, cfg: &CslConfig) -> Result<f64> {
    cfg.validate()?;
    let AngleLabel::Dense(values) = label else {
        return Err(Error::Range("CSL decode expects a dense label".into()));
    };
    if values.len() != cfg.num_bins {
        return Err(Error::Range(format!(
            "dense label has {} bins, config expects {}",
            values.len(),
            cfg.num_bins
        )));
    }
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    Ok(bin_center(best, cfg.bin_width()))
}

pub fn to_gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

pub fn from_gray(mut g: u32) -> u32 {
    let mut shift = 1;
    while shift < 32 {
        g ^= g >> shift;
        shift <<= 1;
    }
    g
}

/// Codeword of bin `index`, MSB first.
pub fn dcl_codeword(index: usize, cfg: &DclConfig) -> Result<Vec<u8>> {
    cfg.validate()?;
    if index >= cfg.num_bins() {
        return Err(Error::Range(format!("bin {index} out of {} bins", cfg.num_bins())));
    }
    let value = match cfg.coding {
        Coding::Binary => index as u32,
        Coding::Gray => to_gray(index as u32),
    };
    Ok((0..cfg.num_bits)
        .rev()
        .map(|bit| ((value >> bit) & 1) as u8)
        .collect())
}

pub fn dcl_bin(theta: f64, cfg: &DclConfig) -> Result<usize> {
    cfg.validate()?;
    check_theta(theta)?;
    Ok(bin_index(theta, cfg.bin_width(), cfg.num_bins()))
}

pub fn dcl_encode(theta: f64, cfg: &DclConfig) -> Result<AngleLabel> {
    Ok(AngleLabel::Code(dcl_codeword(dcl_bin(theta, cfg)?, cfg)?))
}

/// Bin index carried by a codeword.
pub fn dcl_index(code: &[u8], cfg: &DclConfig) -> Result<usize> {
    cfg.validate()?;
    if code.len() != cfg.num_bits as usize {
        return Err(Error::Range(format!(
            "code has {} bits, config expects {}",
            code.len(),
            cfg.num_bits
        )));
    }
    let mut value = 0u32;
    for &bit in code {
        if bit > 1 {
            return Err(Error::Range(format!("code bit {bit} is not 0 or 1")));
        }
        value = (value << 1) | bit as u32;
    }
    Ok(match cfg.coding {
        Coding::Binary => value,
        Coding::Gray => from_gray(value),
    } as usize)
}

pub fn dcl_decode(label: &AngleLabel, cfg: &DclConfig) -> Result<f64> {
    let AngleLabel::Code(code) = label else {
        return Err(Error::Range("DCL decode expects a bit code".into()));
    };
    Ok(bin_center(dcl_index(code, cfg)?, cfg.bin_width()))
}
