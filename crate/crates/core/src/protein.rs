//! Query sequences, hydrophobicity labelling and candidate structures.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grf::{Configuration, SiteGraph};

pub const HYDROPHILIC: &str = "KERDQNPHSTG";
pub const HYDROPHOBIC: &str = "AYMWFVLIC";

/// A protein sequence over the 20 one-letter amino-acid codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AminoSequence(String);

impl AminoSequence {
    pub fn new(residues: &str) -> Result<Self> {
        for (position, residue) in residues.chars().enumerate() {
            if !HYDROPHILIC.contains(residue) && !HYDROPHOBIC.contains(residue) {
                return Err(Error::InvalidResidue { position, residue });
            }
        }
        Ok(AminoSequence(residues.into()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// 0 for hydrophilic residues, 1 for hydrophobic ones.
pub fn hydrophobicity_labels(seq: &AminoSequence) -> Configuration {
    let labels: Vec<u8> = seq
        .0
        .chars()
        .map(|c| HYDROPHOBIC.contains(c) as u8)
        .collect();
    Configuration::from_raw(labels)
}

/// A named candidate fold: one residue per site, one edge per contact.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateStructure {
    pub name: String,
    pub graph: Arc<SiteGraph>,
}

impl CandidateStructure {
    pub fn new(name: impl Into<String>, graph: SiteGraph) -> Self {
        CandidateStructure {
            name: name.into(),
            graph: Arc::new(graph),
        }
    }

    /// Checks the graph covers exactly the residues of `seq`.
    pub fn check_against(&self, seq: &AminoSequence) -> Result<()> {
        if self.graph.n_sites() != seq.len() {
            return Err(Error::SiteCountMismatch {
                expected: seq.len(),
                found: self.graph.n_sites(),
            });
        }
        Ok(())
    }
}
