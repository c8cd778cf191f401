//! CSV export of curves: header `t,value`, one row per breakpoint (two rows
//! when the value jumps there), one final row at the horizon. Rationals are
//! rendered as decimals with a configurable digit count; this is the only
//! place where values leave exact arithmetic.

use crate::func::PwFunction;
use crate::rat;
use std::io::{self, Write};

pub fn write_curve<W: Write>(w: &mut W, f: &PwFunction, digits: u32) -> io::Result<()> {
    writeln!(w, "t,value")?;
    let n = f.seg_count();
    for (k, s) in f.segments().iter().enumerate() {
        writeln!(
            w,
            "{},{}",
            rat::to_decimal_trim(&s.start, digits),
            rat::to_decimal_trim(&s.value, digits)
        )?;
        if s.right_limit != s.value {
            writeln!(
                w,
                "{},{}",
                rat::to_decimal_trim(&s.start, digits),
                rat::to_decimal_trim(&s.right_limit, digits)
            )?;
        }
        if k + 1 == n && s.start != *f.horizon() {
            writeln!(
                w,
                "{},{}",
                rat::to_decimal_trim(f.horizon(), digits),
                rat::to_decimal_trim(&f.value_end(), digits)
            )?;
        }
    }
    Ok(())
}

pub fn curve_to_string(f: &PwFunction, digits: u32) -> String {
    let mut buf = Vec::new();
    write_curve(&mut buf, f, digits).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("decimal output is ASCII")
}
