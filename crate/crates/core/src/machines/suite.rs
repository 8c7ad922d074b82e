//! Curated program suites: manifests, budgets, and halting certificates.
//!
//! A suite is a test-time family of programs whose halting is decidable
//! within a declared budget. True jumps are not computable; certified
//! suites are what stand in for them at every level this crate touches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::jump::JumpLab;
use super::oracle::OracleHandle;
use super::program::Program;
use super::Verdict;

/// JSON manifest for a suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub name: String,
    /// Step budget within which every program's halting is decidable.
    pub budget: u64,
    /// Highest jump level the suite certifies (default 3).
    #[serde(default = "default_level_bound")]
    pub level_bound: u32,
    pub programs: Vec<ManifestProgram>,
}

fn default_level_bound() -> u32 {
    3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestProgram {
    pub label: String,
    pub asm: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SuiteProgram {
    pub label: String,
    pub program: Program,
}

/// A loaded suite with its programs decoded.
#[derive(Debug, Clone)]
pub struct Suite {
    pub name: String,
    pub budget: u64,
    pub level_bound: u32,
    pub programs: Vec<SuiteProgram>,
}

impl Suite {
    pub fn from_manifest(manifest: &SuiteManifest) -> Result<Suite> {
        let mut programs = Vec::new();
        for p in &manifest.programs {
            programs.push(SuiteProgram {
                label: p.label.clone(),
                program: Program::parse_asm(&p.asm)?,
            });
        }
        Ok(Suite {
            name: manifest.name.clone(),
            budget: manifest.budget,
            level_bound: manifest.level_bound,
            programs,
        })
    }

    pub fn to_manifest(&self) -> SuiteManifest {
        SuiteManifest {
            name: self.name.clone(),
            budget: self.budget,
            level_bound: self.level_bound,
            programs: self
                .programs
                .iter()
                .map(|p| ManifestProgram {
                    label: p.label.clone(),
                    asm: p.program.print_asm(),
                })
                .collect(),
        }
    }

    pub fn load(path: &std::path::Path) -> Result<Suite> {
        let text = std::fs::read_to_string(path)?;
        let manifest: SuiteManifest = serde_json::from_str(&text)?;
        Suite::from_manifest(&manifest)
    }

    pub fn index_of(&self, label: &str) -> Result<u64> {
        self.programs
            .iter()
            .find(|p| p.label == label)
            .map(|p| p.program.index)
            .ok_or_else(|| Error::Malformed(format!("no suite program labelled {label:?}")))
    }

    pub fn indices(&self) -> Vec<u64> {
        self.programs.iter().map(|p| p.program.index).collect()
    }

    /// Checks that every suite program is halting-decided against the
    /// oracle within the budget; the returned report is the certificate.
    pub fn verify(&self, oracle: &OracleHandle) -> SuiteCertificate {
        let lab = JumpLab::new(oracle.clone(), self.level_bound);
        let mut decided = Vec::new();
        let mut undecided = Vec::new();
        for p in &self.programs {
            let (verdict, at) = lab.decide(1, p.program.index, self.budget);
            match verdict {
                Verdict::Unknown => undecided.push(p.label.clone()),
                v => decided.push(ProgramCert {
                    label: p.label.clone(),
                    index: p.program.index,
                    halts: v == Verdict::In,
                    decided_at: at,
                }),
            }
        }
        SuiteCertificate { decided, undecided }
    }

    /// The default curated suite used by the harnesses and the CLI.
    pub fn builtin() -> Suite {
        let mk = |label: &str, asm: &[&str]| ManifestProgram {
            label: label.into(),
            asm: asm.iter().map(|s| s.to_string()).collect(),
        };
        let manifest = SuiteManifest {
            name: "builtin".into(),
            budget: 4096,
            level_bound: 3,
            programs: vec![
                mk("empty", &[]),
                mk("halt", &["halt"]),
                mk("loop", &["jz r3 0"]),
                mk("out-zero", &["out r0", "halt"]),
                mk("out-one", &["inc r0", "out r0", "halt"]),
                mk("out-all", &["out r0", "inc r0", "jz r3 0"]),
                mk(
                    "echo-oracle",
                    &["query r0 r1", "jz r1 3", "out r0", "inc r0", "jz r3 0"],
                ),
                mk("join-oracle", &["outjoin r0", "inc r0", "jz r3 0"]),
                mk("halt-if-zero-in", &["query r0 r1", "jz r1 0"]),
            ],
        };
        Suite::from_manifest(&manifest).expect("builtin suite parses")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgramCert {
    pub label: String,
    pub index: u64,
    pub halts: bool,
    pub decided_at: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteCertificate {
    pub decided: Vec<ProgramCert>,
    pub undecided: Vec<String>,
}

impl SuiteCertificate {
    pub fn complete(&self) -> bool {
        self.undecided.is_empty()
    }
}
