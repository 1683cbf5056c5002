//! On-disk cache of truncated operator matrices.
//!
//! One JSON document per `(species, Λ, operator name)`. The header repeats
//! the format version, the cutoff and the dimension so a reader can reject a
//! stale or foreign file before touching the entries. Writes go through a
//! temporary file in the same directory followed by a rename.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{GradedOperator, Species, StateSpace};
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational};

pub const CACHE_FORMAT_VERSION: u32 = 1;

/// Environment variable naming the cache directory.
pub const CACHE_DIR_ENV: &str = "IMPURITY_CFT_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CachedOperator {
    pub format_version: u32,
    pub species: Species,
    pub cutoff: String,
    pub dimension: usize,
    pub name: String,
    pub level_shift_x2: i32,
    pub parity_shift: u8,
    /// Basis as twice-mode lists, in enumeration order.
    pub basis: Vec<Vec<u32>>,
    /// `(row, col, value)` with exact rational values written as `p/q`.
    pub entries: Vec<(usize, usize, String)>,
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn from_env() -> Option<Result<Self>> {
        std::env::var_os(CACHE_DIR_ENV).map(|d| Self::new(PathBuf::from(d)))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, species: Species, cutoff_x2: u32, name: &str) -> PathBuf {
        let sp = match species {
            Species::Fermion => "fermion",
            Species::Boson => "boson",
        };
        let clean: String =
            name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
        self.dir.join(format!("{sp}-x2L{cutoff_x2}-{clean}.json"))
    }

    fn species_of(space: &StateSpace) -> Result<Species> {
        match space.factors() {
            [s] => Ok(s.species),
            _ => Err(Error::Unsupported("only single-factor operators are cached".into())),
        }
    }

    pub fn store(&self, name: &str, op: &GradedOperator<Rational>) -> Result<PathBuf> {
        let space = op.space();
        let species = Self::species_of(space)?;
        let mut entries = Vec::with_capacity(op.nnz());
        for j in 0..op.dim() {
            for (&i, v) in op.column(j) {
                entries.push((i, j, v.to_string()));
            }
        }
        let doc = CachedOperator {
            format_version: CACHE_FORMAT_VERSION,
            species,
            cutoff: space.cutoff().to_string(),
            dimension: space.dim(),
            name: name.to_string(),
            level_shift_x2: op.level_shift_x2(),
            parity_shift: op.parity_shift(),
            basis: space.basis().iter().map(|s| s.parts()[0].clone()).collect(),
            entries,
        };
        let path = self.path(species, space.cutoff_x2(), name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, &doc)?;
        tmp.flush()?;
        tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
        Ok(path)
    }

    /// Load a cached operator for `space`; `Ok(None)` when absent.
    pub fn load(&self, space: &Arc<StateSpace>, name: &str) -> Result<Option<GradedOperator<Rational>>> {
        let species = Self::species_of(space)?;
        let path = self.path(species, space.cutoff_x2(), name);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let doc: CachedOperator = serde_json::from_slice(&bytes)?;
        if doc.format_version != CACHE_FORMAT_VERSION {
            return Ok(None);
        }
        let basis_matches = doc.dimension == space.dim()
            && doc.cutoff == space.cutoff().to_string()
            && doc.species == species
            && doc.basis.iter().zip(space.basis()).all(|(a, b)| a == &b.parts()[0]);
        if !basis_matches {
            return Err(Error::Dimension(format!("cache file {} does not match the space", path.display())));
        }
        let mut columns = vec![BTreeMap::new(); space.dim()];
        for (i, j, v) in doc.entries {
            let value = parse_rational(&v).ok_or_else(|| Error::Dimension(format!("bad cached entry {v}")))?;
            if i >= space.dim() || j >= space.dim() {
                return Err(Error::Dimension(format!("cached entry ({i},{j}) out of range")));
            }
            columns[j].insert(i, value);
        }
        GradedOperator::from_columns(space.clone(), doc.level_shift_x2, doc.parity_shift, columns).map(Some)
    }

    pub fn get_or_build(
        &self,
        space: &Arc<StateSpace>,
        name: &str,
        build: impl FnOnce() -> Result<GradedOperator<Rational>>,
    ) -> Result<GradedOperator<Rational>> {
        if let Some(op) = self.load(space, name)? {
            return Ok(op);
        }
        let op = build()?;
        self.store(name, &op)?;
        Ok(op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{enumerate_basis, ModeIndex, ModeSum, Sector};
    use crate::scalar::rat;

    #[test]
    fn store_then_load_returns_same_matrix() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let space = Arc::new(enumerate_basis(Species::Boson, &rat(4, 1)).unwrap());
        let sec = Sector::chiral(Species::Boson);
        let mut sum = ModeSum::new();
        sum.push(rat(3, 2), vec![ModeIndex::boson(sec, -1).unwrap(), ModeIndex::boson(sec, 1).unwrap()]);
        let op = GradedOperator::from_mode_sum(space.clone(), &sum).unwrap();
        let path = cache.store("n1", &op).unwrap();
        assert!(path.exists());
        let back = cache.load(&space, "n1").unwrap().unwrap();
        assert_eq!(back, op);
        assert!(cache.load(&space, "missing").unwrap().is_none());
    }

    #[test]
    fn mismatched_space_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let space = Arc::new(enumerate_basis(Species::Fermion, &rat(2, 1)).unwrap());
        let op = GradedOperator::<Rational>::identity(space.clone());
        let path = cache.store("id", &op).unwrap();
        let mut doc: CachedOperator = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
        doc.dimension += 1;
        fs::write(&path, serde_json::to_vec(&doc).unwrap()).unwrap();
        assert!(cache.load(&space, "id").is_err());
    }
}
