//! Grid arguments: `start:stop:step` ranges or comma lists.

const SNAP: f64 = 1e12;
const REACH: f64 = 1e-12;

fn snap(x: f64) -> f64 {
    let s = (x * SNAP).round() / SNAP;
    if s == 0.0 {
        0.0
    } else {
        s
    }
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("not a number: '{s}'"))?;
    if !v.is_finite() {
        return Err(format!("not a finite number: '{s}'"));
    }
    Ok(v)
}

/// Parses `start:stop:step` (stop included when reachable within 1e-12,
/// points snapped to 1e-12) or `a,b,c`. An empty string is an empty grid.
pub fn parse_real_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if !s.contains(':') {
        return s.split(',').map(number).collect();
    }
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(format!("expected start:stop:step, got '{s}'"));
    };
    let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
    if step == 0.0 {
        return Err("grid step must be non-zero".into());
    }
    if (stop - start) * step < 0.0 {
        return Err(format!("grid step {step} does not lead from {start} to {stop}"));
    }
    let count = ((stop - start) / step + REACH / step.abs()).floor();
    if count > 1e7 {
        return Err("grid has too many points".into());
    }
    Ok((0..=count as usize)
        .map(|k| snap(start + k as f64 * step))
        .collect())
}

/// Dimension lists: `2:6`, `2:8:2` or `2,3,5`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let int = |p: &str| {
        p.trim()
            .parse::<usize>()
            .map_err(|_| format!("not a dimension: '{p}'"))
    };
    let dims: Vec<usize> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let (a, b, step) = match parts.as_slice() {
            [a, b] => (int(a)?, int(b)?, 1),
            [a, b, c] => (int(a)?, int(b)?, int(c)?),
            _ => return Err(format!("expected start:stop[:step], got '{s}'")),
        };
        if step == 0 || b < a {
            return Err(format!("bad dimension range '{s}'"));
        }
        (a..=b).step_by(step).collect()
    } else {
        s.split(',').map(int).collect::<Result<_, _>>()?
    };
    if dims.contains(&0) {
        return Err("dimensions must be at least 1".into());
    }
    Ok(dims)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_include_reachable_endpoint() {
        assert_eq!(
            parse_real_grid("-1:1:0.5").unwrap(),
            vec![-1.0, -0.5, 0.0, 0.5, 1.0]
        );
        let g = parse_real_grid("-1.9:2:0.1").unwrap();
        assert_eq!(g.len(), 40);
        assert_eq!(g[0], -1.9);
        assert_eq!(*g.last().unwrap(), 2.0);
        assert_eq!(g[19], 0.0);
        assert_eq!(g[10], -0.9);
        assert_eq!(parse_real_grid("0:1:0.3").unwrap(), vec![0.0, 0.3, 0.6, 0.9]);
        assert_eq!(parse_real_grid("2:0:-1").unwrap(), vec![2.0, 1.0, 0.0]);
    }

    #[test]
    fn lists_and_errors() {
        assert_eq!(parse_real_grid("0.5, 1,1.5").unwrap(), vec![0.5, 1.0, 1.5]);
        assert_eq!(parse_real_grid("").unwrap(), Vec::<f64>::new());
        assert!(parse_real_grid("0:1:0").is_err());
        assert!(parse_real_grid("0:1:-0.5").is_err());
        assert!(parse_real_grid("0:1").is_err());
        assert!(parse_real_grid("a,b").is_err());
        assert!(parse_real_grid("nan").is_err());
    }

    #[test]
    fn dimensions() {
        assert_eq!(parse_dims("2:6").unwrap(), vec![2, 3, 4, 5, 6]);
        assert_eq!(parse_dims("2:8:3").unwrap(), vec![2, 5, 8]);
        assert_eq!(parse_dims("4").unwrap(), vec![4]);
        assert_eq!(parse_dims("3,1").unwrap(), vec![3, 1]);
        assert!(parse_dims("0:3").is_err());
        assert!(parse_dims("5:2").is_err());
        assert!(parse_dims("x").is_err());
    }
}
