//! Projecting values onto the unit interval with an ECDF fitted on a base
//! set: exact lattice for the base itself, ties spread inside their class.
//!
//! cargo run --example ecdf_projection

use vv::projection::{EcdfModel, Spread};

fn main() -> vv::Result<()> {
    let base = [3.0, 1.0, 2.0, 2.0, 5.0];
    let model = EcdfModel::fit(&base)?;
    println!(
        "self-projection: {:?}",
        model.project(&base, Spread::Lattice)?.values
    );

    let test = [0.0, 2.0, 2.1, 4.0, 4.0, 9.0];
    println!(
        "test projection: {:?}",
        model.project(&test, Spread::Lattice)?.values
    );
    println!(
        "randomized ties: {:?}",
        model.project(&test, Spread::Randomized { seed: 7 })?.values
    );
    Ok(())
}
