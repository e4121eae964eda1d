use photon_fabric::fabric::{count_components, generate, ArchitectureKind, ArchitectureSpec};
use photon_fabric::table;

use super::device::run_metrics;
use crate::artifacts::OutDir;
use crate::config::{Provenance, ReportConfig};
use crate::error::CliError;

pub fn report(cfg: &ReportConfig) -> Result<(), CliError> {
    let provenance = Provenance::new("report", cfg);
    let comments = provenance.comments();
    let out = OutDir::create(&cfg.out)?;

    out.write("architectures.csv", |w| -> Result<(), CliError> {
        table::write_comments(w, &comments)?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "kind", "rails", "active", "passive_crossovers", "passive_filters", "couplers", "shuffle_blocks",
            "terminators", "columns",
        ])
        .map_err(table::TableError::from)?;
        for kind in ArchitectureKind::ALL {
            let c = count_components(&generate(&ArchitectureSpec::new(kind))?);
            let mut row = vec![kind.name().to_string()];
            row.extend(
                [c.rails, c.active, c.passive_crossovers, c.passive_filters, c.couplers, c.shuffle_blocks, c.terminators, c.columns]
                    .map(|v| v.to_string()),
            );
            csv.write_record(&row).map_err(table::TableError::from)?;
        }
        csv.flush()?;
        Ok(())
    })?;

    out.write("devices.csv", |w| -> Result<(), CliError> {
        table::write_comments(w, &comments)?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["run", "condition", "wavelength_nm", "insertion_loss_db", "crosstalk_db", "ratios"])
            .map_err(table::TableError::from)?;
        for dir in &cfg.runs {
            for m in run_metrics(dir)? {
                let ratios: Vec<String> = m.ratios.iter().map(|r| r.to_string()).collect();
                let row = [
                    dir.display().to_string(),
                    m.label,
                    (m.wavelength * 1e9).to_string(),
                    m.insertion_loss_db.to_string(),
                    m.crosstalk_db.to_string(),
                    ratios.join(";"),
                ];
                csv.write_record(&row).map_err(table::TableError::from)?;
            }
        }
        csv.flush()?;
        Ok(())
    })
}
