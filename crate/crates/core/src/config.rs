//! Plain-text `key=value` pipeline configuration.
//!
//! Recognized keys: `alpha`, `beta`, `gamma`, `sigma_dist_frac`,
//! `freq_threshold`, `kappa`, `lambda`, `eta`, `alpha_fusion`,
//! `probe_threshold`, `top_k`, `tau_acc`, `w_fu`, `w_obj`. Missing keys keep
//! their defaults; unknown keys are an error.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::objects::ScoringWeights;
use crate::recognition::FusionWeights;

/// Objects-in-action weights with the distance width given as a fraction of
/// the frame diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoringConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sigma_dist_frac: f64,
    pub freq_threshold: f64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0 / 3.0,
            beta: 1.0 / 3.0,
            gamma: 1.0 / 3.0,
            sigma_dist_frac: 0.15,
            freq_threshold: 0.2,
        }
    }
}

impl ScoringConfig {
    /// Weights for a frame of the given size.
    pub fn resolve(&self, frame_width: u32, frame_height: u32) -> ScoringWeights {
        let diagonal = f64::from(frame_width).hypot(f64::from(frame_height));
        ScoringWeights {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            sigma_dist: self.sigma_dist_frac * diagonal,
            freq_threshold: self.freq_threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub scoring: ScoringConfig,
    pub fusion: FusionWeights,
    /// Correctness threshold on min(precision, recall), strict.
    pub tau_acc: f64,
    /// Weight of unit-key similarity in recipe classification.
    pub w_fu: f64,
    /// Weight of object-label similarity in recipe classification.
    pub w_obj: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            scoring: ScoringConfig::default(),
            fusion: FusionWeights::default(),
            tau_acc: 0.8,
            w_fu: 0.5,
            w_obj: 0.5,
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Config { line, msg };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "top_k" {
                cfg.fusion.top_k = value
                    .parse()
                    .map_err(|_| err(format!("top_k must be a positive integer, got {value:?}")))?;
                continue;
            }
            let v: f64 = value
                .parse()
                .map_err(|_| err(format!("{key} must be a number, got {value:?}")))?;
            if !v.is_finite() {
                return Err(err(format!("{key} must be finite")));
            }
            let slot = match key {
                "alpha" => &mut cfg.scoring.alpha,
                "beta" => &mut cfg.scoring.beta,
                "gamma" => &mut cfg.scoring.gamma,
                "sigma_dist_frac" => &mut cfg.scoring.sigma_dist_frac,
                "freq_threshold" => &mut cfg.scoring.freq_threshold,
                "kappa" => &mut cfg.fusion.kappa,
                "lambda" => &mut cfg.fusion.lambda,
                "eta" => &mut cfg.fusion.eta,
                "alpha_fusion" => &mut cfg.fusion.alpha_fusion,
                "probe_threshold" => &mut cfg.fusion.probe_threshold,
                "tau_acc" => &mut cfg.tau_acc,
                "w_fu" => &mut cfg.w_fu,
                "w_obj" => &mut cfg.w_obj,
                _ => return Err(err(format!("unknown key {key:?}"))),
            };
            *slot = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.scoring.resolve(1, 1).validate()?;
        if !(self.scoring.sigma_dist_frac > 0.0) {
            return Err(Error::InvalidParameter("sigma_dist_frac must be positive".into()));
        }
        self.fusion.validate()?;
        if !(0.0..=1.0).contains(&self.tau_acc) {
            return Err(Error::InvalidParameter("tau_acc must lie in [0, 1]".into()));
        }
        if self.w_fu < 0.0 || self.w_obj < 0.0 || self.w_fu + self.w_obj <= 0.0 {
            return Err(Error::InvalidParameter(
                "w_fu and w_obj must be non-negative with a positive sum".into(),
            ));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let s = &self.scoring;
        let f = &self.fusion;
        for (k, v) in [
            ("alpha", s.alpha),
            ("beta", s.beta),
            ("gamma", s.gamma),
            ("sigma_dist_frac", s.sigma_dist_frac),
            ("freq_threshold", s.freq_threshold),
            ("kappa", f.kappa),
            ("lambda", f.lambda),
            ("eta", f.eta),
            ("alpha_fusion", f.alpha_fusion),
            ("probe_threshold", f.probe_threshold),
        ] {
            let _ = writeln!(out, "{k}={v}");
        }
        let _ = writeln!(out, "top_k={}", f.top_k);
        let _ = writeln!(out, "tau_acc={}", self.tau_acc);
        let _ = writeln!(out, "w_fu={}", self.w_fu);
        let _ = writeln!(out, "w_obj={}", self.w_obj);
        out
    }
}
