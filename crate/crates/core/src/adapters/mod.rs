//! Converters from external datasets into corpus entries.

pub mod e2e;
pub mod webnlg;
pub mod wikisql;

pub use e2e::{e2e_to_tripleset, E2eOutcome, MeaningRepresentation, MrParseError};
pub use webnlg::webnlg_ingest;
pub use wikisql::{align_row, filter_sql, has_aggregate, Alignment, SqlError, SqlFilter, SqlQuery};
