//! Static metrics for a Python program: Halstead volume, cyclomatic
//! complexity, SLOC, comment density, maintainability index.

use mot_harness::metrics::{analyze, maintainability_index, MiFormula};

const PROGRAM: &str = r#"
import sys

# read all values
def read():
    return list(map(int, sys.stdin.read().split()))


def classify(x):
    """Sign of x as a word."""
    if x > 0:
        return "positive"
    elif x < 0:
        return "negative"
    return "zero"


for v in read():
    print(classify(v))
"#;

fn main() {
    let m = analyze(PROGRAM);
    println!("halstead volume   {:.2}", m.halstead_volume);
    println!("cyclomatic        {}", m.cyclomatic);
    println!("sloc              {}", m.sloc);
    println!("comment density   {:.3}", m.comment_density);
    println!("functions         {}", m.function_count);
    println!("maintainability   {:.2}", m.maintainability);

    let unit = maintainability_index(1.0, 1.0, 1.0, 0.0, MiFormula::Classic).unwrap();
    println!("MI of a one-line program: {unit:.2}");
}
