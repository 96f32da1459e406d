pub fn run<I: IntoIterator<Item = String>>(_argv: I) -> i32 { 0 }
