//! Command-line front end for the `densecode` toolkit: file formats for count
//! data and protocols, run reports, and the subcommands behind the
//! `densecode` binary.

pub mod commands;
pub mod dataset;
pub mod error;
pub mod protocol_file;
pub mod report;

pub use commands::{run, Format};
pub use error::{CliError, CliResult};
pub use report::RunReport;

/// Renders a report in the requested format.
pub fn render(report: &RunReport, format: Format, precision: usize) -> String {
    match format {
        Format::Text => report.to_text(precision),
        Format::Json => {
            serde_json::to_string_pretty(&report.to_json(precision)).expect("reports serialize")
                + "\n"
        }
    }
}
