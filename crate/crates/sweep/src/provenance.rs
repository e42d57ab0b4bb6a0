use std::fmt::Write as _;
use std::time::Duration;

use crate::config::RunConfig;

/// Self-describing record of how a set of outputs was produced.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub config: RunConfig,
    pub workers: usize,
    pub wall_time: Duration,
    pub files: Vec<String>,
    pub failures: usize,
    /// Extra `key = value` lines (derived quantities, notes).
    pub extra: Vec<(String, String)>,
}

impl Provenance {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# command: {}", self.command);
        let _ = writeln!(out, "# workers: {}", self.workers);
        let _ = writeln!(out, "# wall_time_s: {:.3}", self.wall_time.as_secs_f64());
        let _ = writeln!(out, "# failed_points: {}", self.failures);
        let _ = writeln!(out, "# files: {}", self.files.join(" "));
        for (k, v) in &self.extra {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str("# resolved configuration; feed back with --config to regenerate\n");
        for (k, v) in self.config.echo() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RawConfig;

    #[test]
    fn rendered_provenance_is_a_loadable_config() {
        let mut config = RunConfig::default();
        config.bath.xi = 0.37;
        let p = Provenance {
            command: "point".into(),
            config: config.clone(),
            workers: 1,
            wall_time: Duration::from_millis(1500),
            files: vec!["point.csv".into()],
            failures: 0,
            extra: vec![("xi_c.fgr".into(), "0.8".into())],
        };
        let parsed = RawConfig::parse(&p.render()).unwrap().resolve().unwrap();
        assert_eq!(parsed, config);
    }
}
