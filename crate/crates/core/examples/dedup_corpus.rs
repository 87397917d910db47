//! Remove training problems that leak into the test split.

use mot_harness::corpus::{dedup_against, statement_similarity, Corpus, Problem, Split};

fn main() {
    let train = Corpus::new(
        vec![
            Problem::new(
                "t1",
                "Given an array of n integers, print the maximum subarray sum.",
                Split::Train,
            ),
            Problem::new("t2", "Count the vowels in a string.", Split::Train),
            Problem::new(
                "t3",
                "Given  an array of N integers, print the MAXIMUM subarray sum!",
                Split::Train,
            ),
        ],
        "inline",
    )
    .unwrap();
    let test = Corpus::new(
        vec![Problem::new(
            "e1",
            "Given an array of n integers, print the maximum subarray sum.",
            Split::Test,
        )],
        "inline",
    )
    .unwrap();

    println!(
        "similarity(t2, e1) = {:.3}",
        statement_similarity(&train.problems[1].statement, &test.problems[0].statement)
    );
    let (kept, report) = dedup_against(&train, &test, 0.9).unwrap();
    for r in &report.removed {
        println!(
            "removed {} (matches {}, {:?}, {:.3})",
            r.train_id, r.holdout_id, r.kind, r.similarity
        );
    }
    println!("kept {} of {}", kept.len(), report.examined);
}
