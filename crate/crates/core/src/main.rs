use clap::Parser;
use germdeform::cli::{main_with_args, Args};

fn main() {
    std::process::exit(main_with_args(Args::parse()));
}
