use std::fmt;
use std::str::FromStr;

use crate::error::{input, CliError};

/// `start:stop:count[:log]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn linear(start: f64, stop: f64, count: usize) -> Self {
        GridSpec { start, stop, count, log: false }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.count - 1;
        (0..self.count)
            .map(|i| {
                if i == n {
                    return self.stop;
                }
                let t = i as f64 / n as f64;
                if self.log {
                    (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(input(format!("grid `{s}`: expected start:stop:count[:log]")));
        }
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| input(format!("grid `{s}`: `{x}` is not a number")));
        let start = num(parts[0])?;
        let stop = num(parts[1])?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| input(format!("grid `{s}`: count `{}` is not a positive integer", parts[2])))?;
        let log = match parts.get(3).map(|x| x.trim()) {
            None | Some("lin") | Some("linear") => false,
            Some("log") => true,
            Some(other) => return Err(input(format!("grid `{s}`: unknown spacing `{other}`"))),
        };
        if count < 2 {
            return Err(input(format!("grid `{s}`: count must be >= 2")));
        }
        if !(start.is_finite() && stop.is_finite()) || !(start < stop) {
            return Err(input(format!("grid `{s}`: need finite start < stop")));
        }
        if log && start <= 0.0 {
            return Err(input(format!("grid `{s}`: log spacing needs positive endpoints")));
        }
        Ok(GridSpec { start, stop, count, log })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)?;
        if self.log {
            write!(f, ":log")?;
        }
        Ok(())
    }
}
