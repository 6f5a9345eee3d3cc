//! Grid refinement with Richardson extrapolation on three model problems.

use bessel_pairs::oracle::{convergence_study, StudyProblem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grids = [256, 512, 1024, 2048];
    let problems = [
        ("flat membrane, pi^2", StudyProblem::FlatMembrane { radius: 1.0 }),
        ("Hardy n = 3, 1/4", StudyProblem::Hardy { v: "const:1".parse()?, w: "pow:2".parse()?, n: 3, radius: 1.0 }),
        ("mode n = 4 k = 1, 3", StudyProblem::Mode { n: 4, m: 0.0, k: 1, radius: 1.0 }),
    ];
    for (label, problem) in &problems {
        let study = convergence_study(problem, &grids)?;
        println!("{label}");
        for (g, v) in &study.samples {
            println!("    N = {g:>5}: {v:.8}");
        }
        println!("    extrapolated {:.8}, observed order {:?}", study.extrapolated, study.observed_order);
    }
    Ok(())
}
