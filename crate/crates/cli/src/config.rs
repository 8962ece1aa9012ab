//! Effective settings: built-in defaults, then the config file, then flags.

use hashcol_core::reduce::ReduceLimits;
use hashcol_core::unify::SearchLimits;

use crate::args::{Format, GlobalArgs};
use crate::error::CliError;
use crate::input::lines;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Settings {
    pub format: Format,
    pub search: SearchLimits,
    pub reduce: ReduceLimits,
    pub sessions: usize,
    pub seed: Option<u64>,
    pub timing: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            format: Format::Text,
            search: SearchLimits::default(),
            reduce: ReduceLimits::default(),
            sessions: 1,
            seed: None,
            timing: false,
        }
    }
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Config(format!("`{key}` expects a number, got `{v}`")))
}

fn flag(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Config(format!("`{key}` expects true or false, got `{v}`"))),
    }
}

impl Settings {
    /// Applies a `key = value` config file.
    pub fn apply_config(&mut self, text: &str) -> Result<(), CliError> {
        for (n, l) in lines(text) {
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {n}: expected `key = value`")))?;
            let (k, v) = (k.trim().replace('-', "_"), v.trim());
            match k.as_str() {
                "format" => {
                    self.format = match v {
                        "text" => Format::Text,
                        "json" => Format::Json,
                        _ => return Err(CliError::Config(format!("unknown format `{v}`"))),
                    }
                }
                "max_word_len" => self.search.bound = number(&k, v)?,
                "max_states" => self.search.max_states = number(&k, v)?,
                "max_branches" => self.reduce.max_branches = number(&k, v)?,
                "max_k" => self.reduce.max_k = Some(number(&k, v)?),
                "collisions" => self.reduce.collisions = flag(&k, v)?,
                "sessions" => self.sessions = number(&k, v)?,
                "seed" => self.seed = Some(number(&k, v)?),
                "timing" => self.timing = flag(&k, v)?,
                _ => return Err(CliError::Config(format!("line {n}: unknown key `{k}`"))),
            }
        }
        Ok(())
    }

    pub fn apply_flags(&mut self, g: &GlobalArgs) {
        if let Some(f) = g.format {
            self.format = f;
        }
        if let Some(n) = g.max_word_len {
            self.search.bound = n;
        }
        if let Some(n) = g.max_states {
            self.search.max_states = n;
        }
        if let Some(n) = g.max_branches {
            self.reduce.max_branches = n;
        }
        if let Some(n) = g.max_k {
            self.reduce.max_k = Some(n);
        }
        if g.no_collisions {
            self.reduce.collisions = false;
        }
        if let Some(n) = g.sessions {
            self.sessions = n;
        }
        if g.seed.is_some() {
            self.seed = g.seed;
        }
        if g.timing {
            self.timing = true;
        }
    }
}
