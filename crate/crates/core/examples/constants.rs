//! Smoothness, strong convexity and gradient noise for every built-in
//! problem family.
//!
//! cargo run --example constants

use sgd_floor::problem::{LinearRegressionData, LogisticRegressionData};
use sgd_floor::{Problem, ProblemConstants, ProblemSpec};

fn main() -> sgd_floor::Result<()> {
    let problems = [
        ("two-point regression", Problem::LinearRegression(LinearRegressionData::scalar(&[1.0, 1.0], &[1.0, -1.0])?)),
        ("three-point regression", Problem::LinearRegression(LinearRegressionData::scalar(&[1.0; 3], &[0.0, 0.0, 3.0])?)),
        (
            "logistic regression",
            Problem::LogisticRegression(LogisticRegressionData::new(
                vec![vec![1.0, 0.0], vec![0.6, 0.8], vec![-0.3, 0.5], vec![0.2, -0.9]],
                vec![1.0, 0.0, 1.0, 0.0],
            )?),
        ),
        ("quartic", Problem::quartic()),
        (
            "synthetic regression (from JSON)",
            ProblemSpec::from_json(include_str!("data/synthetic.json"))?.build()?,
        ),
    ];
    for (name, problem) in &problems {
        let c = ProblemConstants::derive(problem)?;
        println!("{name}");
        println!("  theta_dagger  {:?}", c.theta_dagger);
        println!("  lambda_max_0  {:.6}", c.lambda_max_0);
        println!("  Lambda        {:.6}", c.lambda_rms);
        match c.lambda_min {
            Some(m) => println!("  lambda_min    {m:.6}"),
            None => println!("  lambda_min    none (not strongly convex)"),
        }
        println!("  D0            {:.6}", c.d0);
    }
    Ok(())
}
