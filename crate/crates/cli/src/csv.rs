use std::fmt::Write;

use lcl_core::sim::Stats;

/// `rounds,count,p_leq_r`, one line per histogram bucket.
pub fn histogram(stats: &Stats) -> String {
    let mut out = String::from("rounds,count,p_leq_r\n");
    for (r, (count, p)) in stats.histogram.iter().zip(&stats.p_leq_r).enumerate() {
        writeln!(out, "{r},{count},{p}").expect("writing to a string");
    }
    out
}
