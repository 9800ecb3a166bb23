use mdpsolve::mdp::{random_mdp, save_mdp};

use crate::output::fnv1a64;
use crate::{CliError, GenArgs};

pub fn run(args: GenArgs) -> Result<(), CliError> {
    let mdp = random_mdp(args.n, args.m, args.gamma, args.seed)
        .map_err(|e| CliError::Usage(format!("invalid parameters: {e}")))?;
    let document = save_mdp(&mdp);
    let digest = format!(
        "n={} m={} gamma={} seed={} hash={:#018x}",
        args.n,
        args.m,
        args.gamma,
        args.seed,
        fnv1a64(document.as_bytes())
    );
    match &args.out {
        Some(path) => {
            std::fs::write(path, &document)?;
            println!("{digest}");
            println!("wrote {}", path.display());
        }
        None => {
            print!("{document}");
            eprintln!("{digest}");
        }
    }
    Ok(())
}
