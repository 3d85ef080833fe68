//! Enumeration of mutation operations and their mutant identifiers.
//!
//! Every row contributes one operation per mutation procedure of its
//! operator (VOR contributes two: below-range first). Identifiers start at 1
//! in file order; 0 is the coverage mutant and never names an operation.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::ItemLocator;
use crate::faultmodel::{FaultModelSpec, OperatorKind, OperatorRow};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct MutantId(pub u32);

impl MutantId {
    pub const COVERAGE: MutantId = MutantId(0);

    pub fn is_coverage(self) -> bool {
        self == Self::COVERAGE
    }
}

impl fmt::Display for MutantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown mutant id {0} (valid ids are 1..={1})")]
    UnknownMutant(MutantId, usize),
}

/// A mutation procedure configured for one data item.
#[derive(Debug, Clone, PartialEq)]
pub struct MutationOperation {
    pub id: MutantId,
    pub fault_model: String,
    pub row_index: usize,
    pub operator: OperatorKind,
    pub procedure_index: u8,
    pub locator: ItemLocator,
    pub row: OperatorRow,
}

impl MutationOperation {
    /// Short human label, e.g. `IfHK row 6 VOR/1`.
    pub fn label(&self) -> String {
        if self.operator.procedure_count() > 1 {
            format!(
                "{} row {} {}/{}",
                self.fault_model, self.row_index, self.operator, self.procedure_index
            )
        } else {
            format!("{} row {} {}", self.fault_model, self.row_index, self.operator)
        }
    }
}

pub fn enumerate(spec: &FaultModelSpec) -> Vec<MutationOperation> {
    let mut rows: Vec<_> = spec.rows().collect();
    rows.sort_by_key(|(_, row)| row.row_index);
    let mut next_id = 1u32;
    let mut operations = Vec::new();
    for (model, row) in rows {
        for procedure_index in 0..row.op.procedure_count() {
            operations.push(MutationOperation {
                id: MutantId(next_id),
                fault_model: model.name.clone(),
                row_index: row.row_index,
                operator: row.op,
                procedure_index,
                locator: ItemLocator::for_row(model, row),
                row: row.clone(),
            });
            next_id += 1;
        }
    }
    operations
}

/// The enumerated operations of one set of fault models, indexed by mutant id.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    operations: Vec<MutationOperation>,
}

impl Catalog {
    pub fn new(spec: &FaultModelSpec) -> Self {
        Self {
            operations: enumerate(spec),
        }
    }

    pub fn mutant_count(&self) -> usize {
        self.operations.len()
    }

    pub fn lookup(&self, id: MutantId) -> Result<&MutationOperation, CatalogError> {
        (id.0 as usize)
            .checked_sub(1)
            .and_then(|idx| self.operations.get(idx))
            .ok_or(CatalogError::UnknownMutant(id, self.operations.len()))
    }

    pub fn operations(&self) -> &[MutationOperation] {
        &self.operations
    }

    pub fn iter(&self) -> impl Iterator<Item = &MutationOperation> {
        self.operations.iter()
    }

    /// One line per operation: id, fault model, row, operator, procedure, byte range.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for op in &self.operations {
            let range = op.locator.byte_range();
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}..{}\n",
                op.id, op.fault_model, op.row_index, op.operator, op.procedure_index, range.start,
                range.end
            ));
        }
        out
    }
}

pub fn mutant_count(spec: &FaultModelSpec) -> usize {
    spec.rows()
        .map(|(_, row)| usize::from(row.op.procedure_count()))
        .sum()
}
