pub mod curate;
pub mod edit;
pub mod metrics;
pub mod space;
pub mod synth;

/// Global flags shared by every subcommand.
pub struct Context {
    pub force: bool,
    pub verbose: bool,
}

impl Context {
    pub fn note(&self, message: impl AsRef<str>) {
        if self.verbose {
            eprintln!("latentlens: {}", message.as_ref());
        }
    }
}
