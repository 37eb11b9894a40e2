//! The evolvable parameter vector: one weight and one delay per synapse.
//!
//! Genes are laid out in canonical edge order (see
//! [`NetworkTopology::canonical`](crate::snn::NetworkTopology::canonical)).
//! That ordering is a versioned contract shared with genome files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::snn::{NetworkTopology, N_SYNAPSES};
use crate::{Error, Result};

/// Largest admissible spike-transmission delay, in network ticks.
pub const DELAY_MAX: u16 = 20;
/// Weights are clamped to `[-W_MAX, W_MAX]`.
pub const W_MAX: f64 = 20.0;

pub const GENOME_FILE_MAGIC: &str = "# antsnn-genome v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub weights: Vec<f64>,
    pub delays: Vec<u16>,
}

impl Genome {
    /// All-zero weights, unit delays: a network that never transmits.
    pub fn dead() -> Self {
        Self {
            weights: vec![0.0; N_SYNAPSES],
            delays: vec![1; N_SYNAPSES],
        }
    }

    pub fn new(weights: Vec<f64>, delays: Vec<u16>) -> Result<Self> {
        let g = Self { weights, delays };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != N_SYNAPSES || self.delays.len() != N_SYNAPSES {
            return Err(Error::GenomeShape {
                expected: N_SYNAPSES,
                weights: self.weights.len(),
                delays: self.delays.len(),
            });
        }
        for (i, w) in self.weights.iter().enumerate() {
            if !w.is_finite() || w.abs() > W_MAX {
                return Err(Error::GenomeDomain {
                    index: i,
                    reason: format!("weight {w} outside [-{W_MAX}, {W_MAX}]"),
                });
            }
        }
        for (i, &d) in self.delays.iter().enumerate() {
            if !(1..=DELAY_MAX).contains(&d) {
                return Err(Error::GenomeDomain {
                    index: i,
                    reason: format!("delay {d} outside [1, {DELAY_MAX}]"),
                });
            }
        }
        Ok(())
    }

    pub fn clamp_in_place(&mut self) {
        for w in &mut self.weights {
            *w = w.clamp(-W_MAX, W_MAX);
        }
        for d in &mut self.delays {
            *d = (*d).clamp(1, DELAY_MAX);
        }
    }

    /// Renders the genome as CSV: one row per synapse in canonical order.
    pub fn to_csv_string(&self) -> String {
        self.to_csv_tagged(None)
    }

    /// Like [`Genome::to_csv_string`], with a `# config_hash=` line after
    /// the magic line.
    pub fn to_csv_tagged(&self, config_hash: Option<&str>) -> String {
        let topo = NetworkTopology::canonical();
        let mut out = String::with_capacity(N_SYNAPSES * 32);
        out.push_str(GENOME_FILE_MAGIC);
        out.push('\n');
        if let Some(h) = config_hash {
            out.push_str(&format!("# config_hash={h}\n"));
        }
        out.push_str("index,source,target,weight,delay\n");
        for (i, &(s, t)) in topo.edges().iter().enumerate() {
            // `{}` on f64 prints the shortest representation that round-trips.
            out.push_str(&format!(
                "{i},{s},{t},{},{}\n",
                self.weights[i], self.delays[i]
            ));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.save_tagged(path, None)
    }

    pub fn save_tagged(&self, path: &Path, config_hash: Option<&str>) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(self.to_csv_tagged(config_hash).as_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_csv_str(&text).map_err(|e| match e {
            Error::Format { reason, .. } => Error::Format {
                path: path.to_path_buf(),
                reason,
            },
            other => other,
        })
    }

    /// Parses a genome file, checking each row against the canonical topology.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let bad = |reason: String| Error::Format {
            path: "<genome>".into(),
            reason,
        };
        let mut lines = text.lines();
        match lines.next() {
            Some(l) if l.trim() == GENOME_FILE_MAGIC => {}
            other => return Err(bad(format!("missing header line, found {other:?}"))),
        }
        let body: String = lines.collect::<Vec<_>>().join("\n");
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(body.as_bytes());
        let topo = NetworkTopology::canonical();
        let mut weights = Vec::with_capacity(N_SYNAPSES);
        let mut delays = Vec::with_capacity(N_SYNAPSES);
        for (row, rec) in rdr.deserialize::<(usize, usize, usize, f64, u16)>().enumerate() {
            let (idx, src, tgt, w, d) = rec?;
            if row >= N_SYNAPSES {
                return Err(Error::GenomeShape {
                    expected: N_SYNAPSES,
                    weights: row + 1,
                    delays: row + 1,
                });
            }
            let (es, et) = topo.edges()[row];
            if idx != row || src != es || tgt != et {
                return Err(bad(format!(
                    "row {row} is ({idx}, {src}->{tgt}), topology expects ({row}, {es}->{et})"
                )));
            }
            weights.push(w);
            delays.push(d);
        }
        Genome::new(weights, delays)
    }
}
