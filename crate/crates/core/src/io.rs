//! File formats: scenario JSON, results and sweep CSVs, phase-grid CSV and
//! JSONL trajectories.
//!
//! CSV headers are part of the public interface; see the README for the
//! column meanings.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::benchmark::episode::{EpisodeLog, FrameRecord};
use crate::benchmark::phase::PhaseCell;
use crate::benchmark::scenario::{Scenario, ScenarioLayout};
use crate::benchmark::sweep::{EpisodeResult, SweepPoint};
use crate::controllers::{Algorithm, ControllerConfig};
use crate::dynamics::ModelKind;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub master_seed: u64,
    pub model: ModelKind,
    pub layout: ScenarioLayout,
    pub scenarios: Vec<Scenario>,
}

impl ScenarioFile {
    pub fn write(&self, out: impl Write) -> Result<()> {
        let mut out = std::io::BufWriter::new(out);
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }

    pub fn read(input: impl std::io::Read) -> Result<Self> {
        let file: Self = serde_json::from_reader(input)?;
        if file.scenarios.is_empty() {
            return Err(Error::InvalidInput("scenario file holds no scenarios".into()));
        }
        for sc in &file.scenarios {
            sc.validate()?;
        }
        Ok(file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario_id: usize,
    pub algorithm: Algorithm,
    pub model: ModelKind,
    pub dmin: f64,
    pub k: f64,
    pub param: f64,
    pub efficiency: f64,
    pub safety: f64,
    pub collided: bool,
    pub intervention_rate: f64,
    pub min_distance: f64,
    pub valid: bool,
}

impl ResultRow {
    pub fn new(model: ModelKind, r: &EpisodeResult) -> Self {
        Self {
            scenario_id: r.scenario_id,
            algorithm: r.config.algorithm,
            model,
            dmin: r.config.safety.d_min,
            k: r.config.safety.k,
            param: r.config.parameter(),
            efficiency: r.metrics.efficiency,
            safety: r.metrics.safety,
            collided: r.metrics.collided,
            intervention_rate: r.metrics.intervention_rate,
            min_distance: r.metrics.min_distance,
            valid: r.invalid.is_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    pub model: ModelKind,
    pub dmin: f64,
    pub k: f64,
    pub param: f64,
    pub safety: f64,
    pub efficiency: f64,
    pub collisions: usize,
    pub intervention_rate: f64,
    pub invalid: usize,
}

impl SweepRow {
    pub fn new(model: ModelKind, p: &SweepPoint) -> Self {
        let c: &ControllerConfig = &p.config;
        Self {
            algorithm: c.algorithm,
            model,
            dmin: c.safety.d_min,
            k: c.safety.k,
            param: c.parameter(),
            safety: p.safety,
            efficiency: p.efficiency,
            collisions: p.collisions,
            intervention_rate: p.intervention_rate,
            invalid: p.invalid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub u0x: f64,
    pub u0y: f64,
    pub ux: f64,
    pub uy: f64,
}

impl From<&PhaseCell> for PhaseRow {
    fn from(c: &PhaseCell) -> Self {
        Self {
            x: c.x,
            y: c.y,
            phi: c.phi,
            u0x: c.u0[0],
            u0y: c.u0[1],
            ux: c.u[0],
            uy: c.u[1],
        }
    }
}

/// Writes serializable rows as CSV with a header line.
pub fn write_csv<T: Serialize>(out: impl Write, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(input: impl std::io::Read) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

#[derive(Serialize, Deserialize)]
pub struct TrajectoryLine<F> {
    pub scenario_id: usize,
    pub algorithm: Option<Algorithm>,
    #[serde(flatten)]
    pub frame: F,
}

/// Appends one JSON line per frame of `log`.
pub fn write_trajectory(out: &mut impl Write, scenario_id: usize, log: &EpisodeLog) -> Result<()> {
    for frame in &log.frames {
        let line = TrajectoryLine {
            scenario_id,
            algorithm: log.algorithm,
            frame,
        };
        serde_json::to_writer(&mut *out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trajectory(input: impl BufRead) -> Result<Vec<TrajectoryLine<FrameRecord>>> {
    input
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::episode::{run_episode, EpisodeSettings};
    use crate::benchmark::scenario::generate_scenarios;
    use crate::dynamics::RobotModel;
    use crate::safety_index::SafetyIndexParams;

    #[test]
    fn scenario_file_round_trip() {
        let model = RobotModel::new(ModelKind::Unicycle);
        let layout = ScenarioLayout::for_model(&model);
        let file = ScenarioFile {
            master_seed: 3,
            model: model.kind(),
            layout,
            scenarios: generate_scenarios(3, 2, &layout).unwrap(),
        };
        let mut buf = Vec::new();
        file.write(&mut buf).unwrap();
        assert_eq!(ScenarioFile::read(buf.as_slice()).unwrap(), file);
        assert!(ScenarioFile::read(&b"{}"[..]).is_err());
    }

    #[test]
    fn phase_header_is_stable() {
        let mut buf = Vec::new();
        let cell = PhaseCell { x: 1.0, y: 2.0, phi: -0.5, u0: [0.0, 1.0], u: [0.5, 1.0] };
        write_csv(&mut buf, [PhaseRow::from(&cell)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "x,y,phi,u0x,u0y,ux,uy");
        let back: Vec<PhaseRow> = read_csv(text.as_bytes()).unwrap();
        assert_eq!(back[0], PhaseRow::from(&cell));
    }

    #[test]
    fn trajectory_round_trip() {
        let model = RobotModel::new(ModelKind::Ball);
        let mut sc = generate_scenarios(1, 1, &ScenarioLayout::for_model(&model)).unwrap().remove(0);
        sc.duration = 1.0;
        let cfg = ControllerConfig::new(Algorithm::Bfm, SafetyIndexParams::default());
        let log = run_episode(&model, &cfg, &sc, &EpisodeSettings::default()).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, 7, &log).unwrap();
        let lines = read_trajectory(buf.as_slice()).unwrap();
        assert_eq!(lines.len(), 20);
        assert!(lines.iter().all(|l| l.scenario_id == 7 && l.algorithm == Some(Algorithm::Bfm)));
        assert_eq!(lines[5].frame, log.frames[5]);
    }
}
