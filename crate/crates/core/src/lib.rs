//! Combinatorics of directed complexes: oriented graded posets, molecules,
//! flow graphs and layerings, subdivision posets, and directed complexes.

pub mod complex;
pub mod fixtures;
pub mod flow;
pub mod homology;
pub mod io;
pub mod iso;
pub mod molecule;
pub mod ogposet;
pub mod recognize;
pub mod subdivision;

pub use complex::{DirectedComplex, PastingDiagram, SemiSimplicialSet};
pub use iso::{CanonicalKey, OgIso};
pub use molecule::{Certificate, Molecule, MoleculeError, PlanarTree};
pub use ogposet::{ClosedSubset, ElementId, ElementSet, OgError, OgPoset, Sign, Validation};
pub use recognize::MoleculeContext;
