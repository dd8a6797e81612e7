//! File formats: nodal CSV, Gmsh node sections, JSON reports.

mod csv;
mod msh;
mod report;

pub use self::csv::{insert_tensor, read_points_csv, recovery_fields, write_field_csv, NodalFields};
pub use msh::{read_msh_nodes, MshNodes};
pub use report::{read_report, write_report, DiagnosticsSummary, ReportDocument};
