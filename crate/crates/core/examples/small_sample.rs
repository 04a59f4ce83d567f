//! Two units, two candidate estimates: equal absolute differences, very
//! different index of dissimilarity.

use levelshare::io::render_small_sample;
use levelshare::simulate::small_sample_demo;

fn main() {
    let demo = small_sample_demo();
    print!("{}", render_small_sample(&demo));
    for (k, r) in demo.reports.iter().enumerate() {
        println!(
            "\nSet {}: c_n = {:.4}, K = {}, mean level = {}, mean share = {:.6}",
            k + 1,
            r.c_n,
            r.k,
            r.mean_level,
            r.mean_share
        );
    }
}
