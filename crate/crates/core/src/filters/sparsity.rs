use crate::html::HtmlTree;
use crate::warning::Warning;

use super::FilterError;

/// Empty-cell statistics for one table.
#[derive(Debug, Clone, PartialEq)]
pub struct Sparsity {
    pub cells: usize,
    pub empty_cells: usize,
    /// Empty cells over all cells; 1.0 for a table with no cells.
    pub fraction: f64,
    pub warning: Option<Warning>,
}

/// Share of `td`/`th` cells whose text is empty after trimming.
pub fn table_sparsity(table: &HtmlTree) -> Result<Sparsity, FilterError> {
    if table.label() != "table" {
        return Err(FilterError::NotATable(table.label().to_string()));
    }
    let cells = table.cells();
    let empty = cells
        .iter()
        .filter(|c| c.text_content().trim().is_empty())
        .count();
    Ok(if cells.is_empty() {
        Sparsity {
            cells: 0,
            empty_cells: 0,
            fraction: 1.0,
            warning: Some(Warning::EmptyTable),
        }
    } else {
        Sparsity {
            cells: cells.len(),
            empty_cells: empty,
            fraction: empty as f64 / cells.len() as f64,
            warning: None,
        }
    })
}
