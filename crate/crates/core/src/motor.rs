//! DC motor switching as a three-state machine with dead time and auto-stop.
//!
//! Rules, applied in order for each command at time `t`:
//! 1. A driving motor whose last refresh is at least `dwell_s` old stops at
//!    `since + dwell_s` before the command is looked at.
//! 2. `Stop` stops a driving motor.
//! 3. A drive command matching the current drive only refreshes `since`.
//! 4. A drive command from `Stop` takes effect at `t`.
//! 5. A reversal logs `Stop` at `t` and the new drive one dead-time tick later.
//!    The log therefore never moves directly between `Left` and `Right`.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::decision::Command;
use crate::error::{Error, Result};
use crate::signal_model::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Drive {
    Stop,
    Left,
    Right,
}

impl Drive {
    pub fn is_moving(self) -> bool {
        self != Drive::Stop
    }

    pub fn opposes(self, other: Drive) -> bool {
        matches!(
            (self, other),
            (Drive::Left, Drive::Right) | (Drive::Right, Drive::Left)
        )
    }
}

impl From<Direction> for Drive {
    fn from(d: Direction) -> Self {
        match d {
            Direction::Left => Drive::Left,
            Direction::Right => Drive::Right,
        }
    }
}

impl fmt::Display for Drive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Drive::Stop => "Stop",
            Drive::Left => "Left",
            Drive::Right => "Right",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorState {
    pub drive: Drive,
    pub since_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorCommand {
    pub drive: Drive,
    pub at_s: f64,
}

impl From<Command> for MotorCommand {
    fn from(c: Command) -> Self {
        MotorCommand {
            drive: c.direction.into(),
            at_s: c.time_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotorConfig {
    /// Quiet time after which a driving motor stops on its own.
    pub dwell_s: f64,
    /// Stop interval inserted between opposite drives. One sample at 250 Hz.
    pub dead_time_s: f64,
}

impl Default for MotorConfig {
    fn default() -> Self {
        MotorConfig {
            dwell_s: 1.0,
            dead_time_s: 0.004,
        }
    }
}

impl MotorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dwell_s.is_finite() && self.dwell_s >= 0.0) {
            return Err(Error::param("dwell_s", format!("must be >= 0, got {}", self.dwell_s)));
        }
        if !(self.dead_time_s.is_finite() && self.dead_time_s > 0.0) {
            return Err(Error::param(
                "dead_time_s",
                format!("must be > 0, got {}", self.dead_time_s),
            ));
        }
        Ok(())
    }
}

/// Single-owner motor controller.
#[derive(Debug, Clone)]
pub struct Motor {
    state: MotorState,
    last_command_s: f64,
    cfg: MotorConfig,
}

impl Motor {
    pub fn new(cfg: MotorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Motor {
            state: MotorState {
                drive: Drive::Stop,
                since_s: 0.0,
            },
            last_command_s: 0.0,
            cfg,
        })
    }

    pub fn state(&self) -> MotorState {
        self.state
    }

    fn enter(&mut self, drive: Drive, at_s: f64, log: &mut Vec<MotorState>) {
        self.state = MotorState { drive, since_s: at_s };
        log.push(self.state);
    }

    /// Applies the auto-stop if `t_s` is at least `dwell_s` past the last refresh.
    pub fn advance_to(&mut self, t_s: f64) -> Option<MotorState> {
        let deadline = self.state.since_s + self.cfg.dwell_s;
        if self.state.drive.is_moving() && t_s >= deadline {
            self.state = MotorState {
                drive: Drive::Stop,
                since_s: deadline,
            };
            Some(self.state)
        } else {
            None
        }
    }

    /// Feeds one command; returns the transitions it caused, oldest first.
    pub fn step(&mut self, cmd: MotorCommand) -> Result<Vec<MotorState>> {
        // NaN timestamps fail this check too
        if cmd.at_s.partial_cmp(&self.last_command_s).is_none_or(|o| o.is_lt()) {
            return Err(Error::OutOfOrderCommand {
                at_s: cmd.at_s,
                previous_s: self.last_command_s,
            });
        }
        self.last_command_s = cmd.at_s;
        let mut log = Vec::new();
        log.extend(self.advance_to(cmd.at_s));

        // Commands landing inside a dead-time tick act at the end of it.
        let t = cmd.at_s.max(self.state.since_s);
        let current = self.state.drive;
        match cmd.drive {
            Drive::Stop if current.is_moving() => self.enter(Drive::Stop, t, &mut log),
            Drive::Stop => {}
            wanted if wanted == current => self.state.since_s = t,
            wanted if wanted.opposes(current) => {
                self.enter(Drive::Stop, t, &mut log);
                self.enter(wanted, t + self.cfg.dead_time_s, &mut log);
            }
            wanted => self.enter(wanted, t, &mut log),
        }
        Ok(log)
    }
}

/// Folds `step` over a command stream starting from `Stop` at t = 0.
///
/// The returned log begins with the initial state. A trailing quiet period
/// is not closed; use [`run_until`] for that.
pub fn run_sequence(commands: &[MotorCommand], cfg: &MotorConfig) -> Result<Vec<MotorState>> {
    let mut motor = Motor::new(*cfg)?;
    let mut log = vec![motor.state()];
    for &cmd in commands {
        log.extend(motor.step(cmd)?);
    }
    Ok(log)
}

/// [`run_sequence`] followed by the auto-stop check at `end_s`.
pub fn run_until(commands: &[MotorCommand], cfg: &MotorConfig, end_s: f64) -> Result<Vec<MotorState>> {
    let mut motor = Motor::new(*cfg)?;
    let mut log = vec![motor.state()];
    for &cmd in commands {
        log.extend(motor.step(cmd)?);
    }
    log.extend(motor.advance_to(end_s));
    Ok(log)
}

pub fn write_log_csv<W: Write>(log: &[MotorState], mut out: W) -> std::io::Result<()> {
    writeln!(out, "time_s,state")?;
    for s in log {
        writeln!(out, "{},{}", s.since_s, s.drive)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmd(drive: Drive, at_s: f64) -> MotorCommand {
        MotorCommand { drive, at_s }
    }

    fn drives(log: &[MotorState]) -> Vec<Drive> {
        log.iter().map(|s| s.drive).collect()
    }

    #[test]
    fn stop_to_right() {
        let mut m = Motor::new(MotorConfig::default()).unwrap();
        let log = m.step(cmd(Drive::Right, 0.0)).unwrap();
        assert_eq!(log, vec![MotorState { drive: Drive::Right, since_s: 0.0 }]);
    }

    #[test]
    fn reversal_inserts_stop() {
        let mut m = Motor::new(MotorConfig::default()).unwrap();
        m.step(cmd(Drive::Left, 0.0)).unwrap();
        let log = m.step(cmd(Drive::Right, 0.3)).unwrap();
        assert_eq!(drives(&log), vec![Drive::Stop, Drive::Right]);
        assert_eq!(log[0].since_s, 0.3);
        assert!((log[1].since_s - 0.304).abs() < 1e-12);
    }

    #[test]
    fn timeout_stops_after_dwell() {
        let mut m = Motor::new(MotorConfig::default()).unwrap();
        m.step(cmd(Drive::Right, 2.0)).unwrap();
        assert_eq!(m.advance_to(2.5), None);
        let stop = m.advance_to(3.5).unwrap();
        assert_eq!(stop, MotorState { drive: Drive::Stop, since_s: 3.0 });
    }

    #[test]
    fn same_direction_refreshes() {
        let mut m = Motor::new(MotorConfig::default()).unwrap();
        m.step(cmd(Drive::Right, 0.0)).unwrap();
        assert!(m.step(cmd(Drive::Right, 0.8)).unwrap().is_empty());
        assert_eq!(m.state().since_s, 0.8);
        assert_eq!(m.advance_to(1.5), None);
    }

    #[test]
    fn example_log() {
        let cfg = MotorConfig {
            dwell_s: 2.0,
            ..MotorConfig::default()
        };
        let log = run_sequence(&[cmd(Drive::Right, 0.0), cmd(Drive::Left, 0.5)], &cfg).unwrap();
        assert_eq!(drives(&log), vec![Drive::Stop, Drive::Right, Drive::Stop, Drive::Left]);
        let times: Vec<f64> = log.iter().map(|s| s.since_s).collect();
        assert_eq!(&times[..3], &[0.0, 0.0, 0.5]);
        assert!((times[3] - 0.504).abs() < 1e-12);
    }

    #[test]
    fn empty_stream() {
        let log = run_sequence(&[], &MotorConfig::default()).unwrap();
        assert_eq!(log, vec![MotorState { drive: Drive::Stop, since_s: 0.0 }]);
    }

    #[test]
    fn out_of_order_rejected() {
        let err = run_sequence(&[cmd(Drive::Right, 1.0), cmd(Drive::Left, 0.5)], &MotorConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::OutOfOrderCommand { .. }));
    }

    #[test]
    fn explicit_stop_and_quiet_end() {
        let log = run_until(
            &[cmd(Drive::Left, 0.0), cmd(Drive::Stop, 0.2), cmd(Drive::Right, 0.4)],
            &MotorConfig::default(),
            5.0,
        )
        .unwrap();
        assert_eq!(
            drives(&log),
            vec![Drive::Stop, Drive::Left, Drive::Stop, Drive::Right, Drive::Stop]
        );
        assert_eq!(log.last().unwrap().since_s, 1.4);
    }

    #[test]
    fn simultaneous_reversals_stay_ordered() {
        let log = run_sequence(
            &[cmd(Drive::Right, 0.5), cmd(Drive::Left, 0.5), cmd(Drive::Right, 0.5)],
            &MotorConfig::default(),
        )
        .unwrap();
        assert!(log.windows(2).all(|w| w[0].since_s <= w[1].since_s));
        assert!(log.windows(2).all(|w| !w[0].drive.opposes(w[1].drive)));
    }

    #[test]
    fn log_csv() {
        let mut buf = Vec::new();
        write_log_csv(&[MotorState { drive: Drive::Right, since_s: 0.25 }], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "time_s,state\n0.25,Right\n");
    }
}
