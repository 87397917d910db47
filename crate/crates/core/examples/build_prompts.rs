//! Render every prompt family for one problem and print the transcripts.

use mot_harness::corpus::{Problem, Split, TestCase};
use mot_harness::promptgen::{
    build_clean_prompt, build_direct_prompt, build_mot_prompt, build_mot_step1_prompt,
};

fn main() {
    let problem = Problem::new(
        "sum",
        "Read two integers and print their sum.",
        Split::Train,
    )
    .with_tests(vec![TestCase::new("1 2\n", "3\n")]);
    let solution = "a,b=map(int,input().split())\nprint(a+b)\n";

    let prompts = [
        ("mot", build_mot_prompt(&problem, solution).unwrap()),
        (
            "mot step 1",
            build_mot_step1_prompt(&problem, solution).unwrap(),
        ),
        ("clean", build_clean_prompt(&problem, solution).unwrap()),
        ("direct", build_direct_prompt(&problem)),
    ];
    for (name, prompt) in prompts {
        println!("===== {name} =====\n{}", prompt.transcript());
    }
}
