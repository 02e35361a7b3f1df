use powermix::ComplexPoint;

/// `a:b:steps`, `steps` points with both endpoints included.
pub fn parse_real_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid `{text}` is not of the form a:b:steps"));
    }
    let a = number(parts[0], text)?;
    let b = number(parts[1], text)?;
    let steps: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("grid `{text}`: step count `{}` is not a positive integer", parts[2]))?;
    match steps {
        0 => Err(format!("grid `{text}` has no points")),
        1 if a == b => Ok(vec![a]),
        1 => Err(format!("grid `{text}` needs at least 2 points between distinct endpoints")),
        _ => {
            let last = (steps - 1) as f64;
            Ok((0..steps)
                .map(|i| if i + 1 == steps { b } else { a + (b - a) * (i as f64 / last) })
                .collect())
        }
    }
}

/// `re_a:re_b:steps,im` for a horizontal line of points, or a single point
/// `re` or `re,im`.
pub fn parse_complex_grid(text: &str) -> Result<Vec<ComplexPoint>, String> {
    let (re_part, im) = match text.split_once(',') {
        Some((r, i)) => (r, number(i, text)?),
        None => (text, 0.0),
    };
    let res = if re_part.contains(':') {
        parse_real_grid(re_part)?
    } else {
        vec![number(re_part, text)?]
    };
    Ok(res.into_iter().map(|re| ComplexPoint::new(re, im)).collect())
}

fn number(s: &str, whole: &str) -> Result<f64, String> {
    let s = s.trim();
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("grid `{whole}`: `{s}` is not a finite number")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_grids() {
        assert_eq!(parse_real_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_real_grid("2:2:1").unwrap(), vec![2.0]);
        assert_eq!(parse_real_grid("0:1:101").unwrap()[50], 0.5);
        let g = parse_real_grid("-1:0.3:7").unwrap();
        assert_eq!((g[0], g[6]), (-1.0, 0.3));
        for bad in ["0:1", "0:1:0", "0:1:1", "a:1:2", "0:1:x", "0:inf:3"] {
            assert!(parse_real_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn complex_grids() {
        let g = parse_complex_grid("1:2:2,1.5").unwrap();
        assert_eq!(g, vec![ComplexPoint::new(1.0, 1.5), ComplexPoint::new(2.0, 1.5)]);
        assert_eq!(parse_complex_grid("3").unwrap(), vec![ComplexPoint::real(3.0)]);
        assert_eq!(parse_complex_grid("1.5,1.5").unwrap(), vec![ComplexPoint::new(1.5, 1.5)]);
        assert!(parse_complex_grid("1,").is_err());
    }
}
