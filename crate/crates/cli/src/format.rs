use potrel_core::law::round_significant;
use potrel_core::relevance::Delimiters;
use potrel_core::SigmaTarget;

pub struct Output {
    pub json: bool,
    pub quiet: bool,
}

/// Fixed-point rendering with four significant digits; scientific outside
/// `[1e-4, 1e6)`.
pub fn sig4(x: f64) -> String {
    if x == 0.0 {
        return "0.000".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded = round_significant(x, 4);
    let magnitude = rounded.abs().log10().floor() as i32;
    if !(-4..6).contains(&magnitude) {
        return format!("{rounded:.3e}");
    }
    let decimals = (3 - magnitude).max(0) as usize;
    format!("{rounded:.decimals$}")
}

/// Counts as plain integers or in scientific notation (`1e12`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return if v == 0 {
            Err("count must be positive".into())
        } else {
            Ok(v)
        };
    }
    let v: f64 = s
        .parse()
        .map_err(|_| format!("'{s}' is not a count"))?;
    if !(v.is_finite() && v >= 1.0 && v.fract() == 0.0 && v < 2f64.powi(64)) {
        return Err(format!("'{s}' is not a positive integer count"));
    }
    Ok(v as u64)
}

fn parse_real(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("'{s}' is not a number"))
}

pub fn parse_unit_open(s: &str) -> Result<f64, String> {
    let v = parse_real(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1)"))
    }
}

pub fn parse_unit_closed(s: &str) -> Result<f64, String> {
    let v = parse_real(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

pub fn parse_non_negative(s: &str) -> Result<f64, String> {
    let v = parse_real(s)?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be a non-negative number"))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TargetArg(pub SigmaTarget);

pub fn parse_target(s: &str) -> Result<TargetArg, String> {
    let target = match s {
        "four" => SigmaTarget::FourSigma,
        "six" => SigmaTarget::SixSigma,
        "enough" => SigmaTarget::EnoughSigma,
        other => {
            let value = other
                .strip_prefix("lambda=")
                .ok_or_else(|| format!("unknown target '{other}'; use four, six, enough or lambda=<value>"))?;
            let lambda = parse_real(value)?;
            SigmaTarget::custom(lambda).map_err(|e| e.to_string())?
        }
    };
    Ok(TargetArg(target))
}

pub fn parse_delimiters(s: &str) -> Result<Delimiters, String> {
    match s {
        "ws" => Ok(Delimiters::Whitespace),
        "ws+punct" => Ok(Delimiters::WhitespacePunct),
        other => Err(format!("unknown delimiters '{other}'; use ws or ws+punct")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_significant_digits() {
        assert_eq!(sig4(0.130_678), "0.1307");
        assert_eq!(sig4(0.017_127_86), "0.01713");
        assert_eq!(sig4(0.25), "0.2500");
        assert_eq!(sig4(0.999_998), "1.000");
        assert_eq!(sig4(11.0), "11.00");
        assert_eq!(sig4(1.0042394), "1.004");
        assert_eq!(sig4(2e-9), "2.000e-9");
        assert_eq!(sig4(1_003_191.0), "1.003e6");
    }

    #[test]
    fn counts() {
        assert_eq!(parse_count("20").unwrap(), 20);
        assert_eq!(parse_count("1e12").unwrap(), 1_000_000_000_000);
        assert!(parse_count("0").is_err());
        assert!(parse_count("2.5").is_err());
        assert!(parse_count("x").is_err());
    }

    #[test]
    fn targets() {
        assert!(matches!(parse_target("four").unwrap().0, SigmaTarget::FourSigma));
        assert!(matches!(
            parse_target("lambda=1e-30").unwrap().0,
            SigmaTarget::Custom(l) if l == 1e-30
        ));
        assert!(parse_target("lambda=-1").is_err());
        assert!(parse_target("seven").is_err());
    }
}
