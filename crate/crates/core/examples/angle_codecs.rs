//! Angle classification labels: circular smooth label and dense coded label.

use rotkit::angle_codec::{
    csl_decode, csl_encode, dcl_decode, dcl_encode, AngleLabel, Coding, CslConfig, DclConfig, Window,
};

fn main() -> rotkit::Result<()> {
    let csl = CslConfig {
        num_bins: 36,
        window: Window::Gaussian,
        radius: 3,
    };
    for theta in [-89.0, -10.0, 0.0, 87.5] {
        let label = csl_encode(theta, &csl)?;
        if let AngleLabel::Dense(v) = &label {
            let bars: String = v.iter().map(|x| if *x > 0.5 { '#' } else if *x > 0.0 { '+' } else { '.' }).collect();
            println!("csl {theta:>6.1} -> {bars} -> {:.1}", csl_decode(&label, &csl)?);
        }
    }

    for coding in [Coding::Binary, Coding::Gray] {
        let dcl = DclConfig { num_bits: 6, coding };
        for theta in [-45.0, -44.0] {
            let label = dcl_encode(theta, &dcl)?;
            if let AngleLabel::Code(bits) = &label {
                let s: String = bits.iter().map(|b| char::from(b'0' + b)).collect();
                println!("{coding:?} {theta:>6.1} -> {s} -> {:.3}", dcl_decode(&label, &dcl)?);
            }
        }
    }
    Ok(())
}
