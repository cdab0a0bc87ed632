//! Quick ASCII dump of synthetic digits (manual inspection helper).
use pointconv_core::harness::synthetic_digit;

fn main() {
    for digit in 0..10u8 {
        for seed in [1u64] {
            let img = synthetic_digit(digit, seed * 1000 + digit as u64);
            println!("--- digit {digit} seed {seed} ---");
            for r in 0..28 {
                let mut line = String::new();
                for c in 0..28 {
                    let v = img.get(r, c, 0);
                    line.push(if v > 180.0 { '#' } else if v > 60.0 { '+' } else { '.' });
                }
                println!("{line}");
            }
        }
    }
}
