//! Per-trial and per-SNR result tables.

use std::path::Path;

use rankpen::c64;

use crate::config::{ExperimentConfig, Snr};
use crate::error::CliResult;
use crate::io::{self, Signal};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub snr_db: Snr,
    /// Absolute error of every frequency component, term-major in model order.
    pub freq_err: Vec<f64>,
    pub freq_err_mean: f64,
    pub freq_err_max: f64,
    pub coef_err_max: f64,
    pub recon_err_max: f64,
    pub recon_err_rel: f64,
    pub esprit_freq_err_mean: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub certified: bool,
    pub final_tau: f64,
    pub estimates: Vec<Vec<c64>>,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub snr_db: Snr,
    pub trials: usize,
    pub converged: usize,
    pub freq_err_median: f64,
    pub freq_err_mean: f64,
    pub freq_err_std: f64,
    /// Median divided by the largest median across SNRs.
    pub freq_err_normalized: f64,
    pub recon_err_median: f64,
    pub recon_err_mean: f64,
    pub recon_err_std: f64,
    pub esprit_freq_err_median: Option<f64>,
}

/// The generator (or fitted samples) of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub trial: usize,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<c64>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRow>,
    pub aggregates: Vec<AggregateRow>,
    pub reconstructions: Vec<Reconstruction>,
}

/// Shortest round-trip scientific form.
fn sci(x: f64) -> String {
    format!("{x:e}")
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl Report {
    pub fn new(config: ExperimentConfig, trials: Vec<TrialRow>, reconstructions: Vec<Reconstruction>) -> Self {
        let mut aggregates: Vec<AggregateRow> = Vec::new();
        for &snr in &config.noise.snr_db {
            let rows: Vec<&TrialRow> = trials.iter().filter(|r| r.snr_db == snr).collect();
            if rows.is_empty() {
                continue;
            }
            let freq: Vec<f64> = rows.iter().map(|r| r.freq_err_mean).collect();
            let recon: Vec<f64> = rows.iter().map(|r| r.recon_err_max).collect();
            let esprit: Vec<f64> = rows.iter().filter_map(|r| r.esprit_freq_err_mean).collect();
            let (fm, fs) = mean_std(&freq);
            let (rm, rs) = mean_std(&recon);
            aggregates.push(AggregateRow {
                snr_db: snr,
                trials: rows.len(),
                converged: rows.iter().filter(|r| r.converged).count(),
                freq_err_median: median(&freq),
                freq_err_mean: fm,
                freq_err_std: fs,
                freq_err_normalized: f64::NAN,
                recon_err_median: median(&recon),
                recon_err_mean: rm,
                recon_err_std: rs,
                esprit_freq_err_median: (!esprit.is_empty()).then(|| median(&esprit)),
            });
        }
        let top = aggregates.iter().map(|a| a.freq_err_median).filter(|m| m.is_finite()).fold(0.0, f64::max);
        for a in &mut aggregates {
            a.freq_err_normalized = if top > 0.0 { a.freq_err_median / top } else { 0.0 };
        }
        Self { config, trials, aggregates, reconstructions }
    }

    fn components(&self) -> usize {
        self.trials.iter().map(|r| r.freq_err.len()).max().unwrap_or(0)
    }

    pub fn trial_table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let k = self.components();
        let mut header: Vec<String> = [
            "trial", "seed", "snr_db", "freq_err_mean", "freq_err_max", "coef_err_max", "recon_err_max",
            "recon_err_rel", "esprit_freq_err_mean", "iterations", "converged", "certified", "final_tau",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend((0..k).map(|i| format!("freq_err_{}", i + 1)));
        let rows = self
            .trials
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.trial.to_string(),
                    r.seed.to_string(),
                    r.snr_db.label(),
                    sci(r.freq_err_mean),
                    sci(r.freq_err_max),
                    sci(r.coef_err_max),
                    sci(r.recon_err_max),
                    sci(r.recon_err_rel),
                    r.esprit_freq_err_mean.map_or_else(String::new, sci),
                    r.iterations.to_string(),
                    r.converged.to_string(),
                    r.certified.to_string(),
                    sci(r.final_tau),
                ];
                row.extend((0..k).map(|i| r.freq_err.get(i).map_or_else(String::new, |&e| sci(e))));
                row
            })
            .collect();
        (header, rows)
    }

    pub fn aggregate_table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let header = [
            "snr_db", "trials", "converged", "freq_err_median", "freq_err_mean", "freq_err_std",
            "freq_err_normalized", "recon_err_median", "recon_err_mean", "recon_err_std", "esprit_freq_err_median",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let rows = self
            .aggregates
            .iter()
            .map(|a| {
                vec![
                    a.snr_db.label(),
                    a.trials.to_string(),
                    a.converged.to_string(),
                    sci(a.freq_err_median),
                    sci(a.freq_err_mean),
                    sci(a.freq_err_std),
                    sci(a.freq_err_normalized),
                    sci(a.recon_err_median),
                    sci(a.recon_err_mean),
                    sci(a.recon_err_std),
                    a.esprit_freq_err_median.map_or_else(String::new, sci),
                ]
            })
            .collect();
        (header, rows)
    }

    /// Writes `report_trials.csv`, `report_aggregate.csv`, `estimates.csv`,
    /// `config.json`, `recon/trial_NNNN.csv` and `timings.csv` under `dir`.
    /// Everything except `timings.csv` depends only on the config.
    pub fn save(&self, dir: impl AsRef<Path>) -> CliResult<()> {
        let dir = dir.as_ref();
        let (h, r) = self.trial_table();
        io::write_table(dir.join("report_trials.csv"), &h, &r)?;
        let (h, r) = self.aggregate_table();
        io::write_table(dir.join("report_aggregate.csv"), &h, &r)?;

        let header: Vec<String> = ["trial", "term", "axis", "re", "im"].iter().map(|s| s.to_string()).collect();
        let mut est = Vec::new();
        for t in &self.trials {
            for (k, zeta) in t.estimates.iter().enumerate() {
                for (axis, z) in zeta.iter().enumerate() {
                    est.push(vec![
                        t.trial.to_string(),
                        (k + 1).to_string(),
                        (axis + 1).to_string(),
                        z.re.to_string(),
                        z.im.to_string(),
                    ]);
                }
            }
        }
        io::write_table(dir.join("estimates.csv"), &header, &est)?;

        io::write_text(dir.join("config.json"), &self.config.to_json())?;
        for rec in &self.reconstructions {
            let sig = Signal::new(rec.points.clone(), rec.values.clone());
            io::save_signal(dir.join("recon").join(format!("trial_{:04}.csv", rec.trial)), &sig)?;
        }
        let header = vec!["trial".to_string(), "runtime_s".to_string()];
        let rows: Vec<Vec<String>> =
            self.trials.iter().map(|t| vec![t.trial.to_string(), format!("{:.6}", t.runtime_s)]).collect();
        io::write_table(dir.join("timings.csv"), &header, &rows)
    }

    /// One line per SNR for the terminal.
    pub fn summary(&self) -> String {
        let mut out = format!("{} ({} trials)\n", self.config.experiment.name(), self.trials.len());
        out.push_str("snr_db  median_freq_err  median_recon_err  converged\n");
        for a in &self.aggregates {
            out.push_str(&format!(
                "{:>6}  {:>15.3e}  {:>16.3e}  {}/{}\n",
                a.snr_db.label(),
                a.freq_err_median,
                a.recon_err_median,
                a.converged,
                a.trials
            ));
        }
        out
    }
}
