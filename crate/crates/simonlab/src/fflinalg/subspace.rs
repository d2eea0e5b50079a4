use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fflinalg::field::{FieldSpec, FpVector};
use crate::fflinalg::matrix::{kernel_of_rows, rref};

/// A subspace of F_p^n in canonical form: basis rows in reduced row echelon
/// form with strictly increasing pivot columns. Equal subspaces have equal
/// representations, so derived equality is set equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    field: FieldSpec,
    basis: Vec<FpVector>,
}

#[derive(Serialize, Deserialize)]
struct SubspaceJson {
    p: u64,
    n: usize,
    basis: Vec<Vec<u64>>,
}

impl Subspace {
    pub fn zero(field: FieldSpec) -> Self {
        Subspace {
            field,
            basis: Vec::new(),
        }
    }

    pub fn full(field: FieldSpec) -> Self {
        let basis = (0..field.n()).map(|i| field.unit_vector(i)).collect();
        Subspace { field, basis }
    }

    /// Canonicalize a spanning set into RREF basis form.
    pub fn from_spanning(field: FieldSpec, vectors: &[FpVector]) -> Self {
        let (basis, _) = rref(field, vectors);
        Subspace { field, basis }
    }

    /// Construct directly from rows already known to be a canonical RREF basis.
    pub fn from_rref_basis(field: FieldSpec, basis: Vec<FpVector>) -> Self {
        debug_assert_eq!(rref(field, &basis).0, basis);
        Subspace { field, basis }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn basis(&self) -> &[FpVector] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    /// |subspace| = p^dim as u64; panics on overflow.
    pub fn size(&self) -> u64 {
        self.field.p().checked_pow(self.dim() as u32).expect("p^dim overflow")
    }

    fn check_compatible(&self, other: &Subspace) -> Result<()> {
        if self.field != other.field {
            return Err(Error::DimensionMismatch(
                "subspaces live over different fields".into(),
            ));
        }
        Ok(())
    }

    /// Membership test by reduction against the RREF basis.
    pub fn contains(&self, v: &[u64]) -> bool {
        let f = &self.field;
        let mut w: FpVector = v.to_vec();
        for row in &self.basis {
            let pivot = row.iter().position(|&c| c != 0).unwrap();
            if w[pivot] != 0 {
                let factor = w[pivot];
                w = f.sub_vec(&w, &f.scale_vec(factor, row));
            }
        }
        f.is_zero_vector(&w)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(other.basis.iter().all(|v| self.contains(v)))
    }

    /// The annihilator {y : y . x = 0 for all x in self}.
    pub fn annihilator(&self) -> Subspace {
        kernel_of_rows(self.field, &self.basis)
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_compatible(other)?;
        let mut rows = self.basis.clone();
        rows.extend_from_slice(&other.basis);
        Ok(Subspace::from_spanning(self.field, &rows))
    }

    /// Intersection via annihilators: A cap B = (A^o + B^o)^o.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_compatible(other)?;
        let ann = self.annihilator().sum(&other.annihilator())?;
        Ok(ann.annihilator())
    }

    /// A direct-sum complement Y of `self` inside `ambient`: Y + self = ambient
    /// and Y cap self = {0}. Deterministic: ambient basis vectors are taken in
    /// pivot order and kept when independent of what has been collected so far.
    pub fn complement_in(&self, ambient: &Subspace) -> Result<Subspace> {
        self.check_compatible(ambient)?;
        if !ambient.contains_subspace(self)? {
            return Err(Error::Precondition(
                "complement_in requires Z to be a subspace of K".into(),
            ));
        }
        let mut working = self.basis.clone();
        let mut rank = self.dim();
        let mut chosen: Vec<FpVector> = Vec::new();
        for cand in &ambient.basis {
            let mut trial = working.clone();
            trial.push(cand.clone());
            let (reduced, new_rank) = rref(self.field, &trial);
            if new_rank > rank {
                chosen.push(cand.clone());
                working = reduced;
                rank = new_rank;
            }
        }
        Ok(Subspace::from_spanning(self.field, &chosen))
    }

    /// All p^dim vectors of the subspace.
    pub fn elements(&self) -> Vec<FpVector> {
        let f = &self.field;
        let p = f.p();
        let count = p.pow(self.dim() as u32);
        (0..count)
            .map(|idx| {
                let mut v = f.zero_vector();
                let mut i = idx;
                for b in &self.basis {
                    let c = i % p;
                    i /= p;
                    v = f.add_vec(&v, &f.scale_vec(c, b));
                }
                v
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.field.p(),
            "n": self.field.n(),
            "basis": self.basis,
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Subspace> {
        let s: SubspaceJson = serde_json::from_value(value.clone())?;
        let field = FieldSpec::new(s.p, s.n)?;
        for v in &s.basis {
            field.validate_vector(v)?;
        }
        Ok(Subspace::from_spanning(field, &s.basis))
    }
}
