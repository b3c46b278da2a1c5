use std::path::{Path as FsPath, PathBuf};

use sigkit::io::parse_series;
use sigkit::tensor::{MomentDistribution, WeightSequence};
use sigkit::{Error, Path, Result, TimeSeries};

use crate::manifest::Recorder;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub fn load_series(rec: &mut Recorder, file: &FsPath) -> Result<TimeSeries> {
    let bytes = rec.read(file)?;
    parse_series(bytes.as_slice()).map_err(|e| match e {
        Error::InvalidInput(m) => invalid(format!("{}: {m}", file.display())),
        other => other,
    })
}

pub fn load_path(rec: &mut Recorder, file: &FsPath, time_augment: bool, basepoint: bool) -> Result<Path> {
    Path::from_series(&load_series(rec, file)?, time_augment, basepoint)
}

/// CSV files of a sample: every `*.csv` in a directory sorted by name, or the
/// lines of a list file (blank lines and `#` comments skipped, relative
/// entries resolved against the list's directory).
pub fn sample_files(rec: &mut Recorder, source: &FsPath) -> Result<Vec<PathBuf>> {
    let files = if source.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(source)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
            .collect();
        files.sort();
        files
    } else {
        let text = String::from_utf8(rec.read(source)?)
            .map_err(|_| invalid(format!("{} is not UTF-8", source.display())))?;
        let base = source.parent().unwrap_or(FsPath::new("."));
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| base.join(l))
            .collect()
    };
    if files.is_empty() {
        return Err(invalid(format!("no CSV files listed in {}", source.display())));
    }
    Ok(files)
}

pub struct Sample {
    pub ids: Vec<String>,
    pub paths: Vec<Path>,
}

pub fn load_sample(rec: &mut Recorder, source: &FsPath, time_augment: bool, basepoint: bool) -> Result<Sample> {
    let files = sample_files(rec, source)?;
    let mut ids = Vec::with_capacity(files.len());
    let mut paths = Vec::with_capacity(files.len());
    for f in &files {
        ids.push(
            f.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| f.display().to_string()),
        );
        paths.push(load_path(rec, f, time_augment, basepoint)?);
    }
    Ok(Sample { ids, paths })
}

fn number(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| invalid(format!("{s:?} is not a number")))
}

/// Weight sequences from the command line: `ones`, `constant:c`,
/// `table:v0,v1,...`, `geometric:theta`, `sqrt-exp`, `exponential:rate`,
/// or an inline JSON object.
pub fn parse_phi(spec: &str) -> Result<WeightSequence> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        return Ok(serde_json::from_str(spec)?);
    }
    let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let phi = match name {
        "ones" => WeightSequence::ones(),
        "constant" => WeightSequence::constant(number(arg)?),
        "table" => WeightSequence::table(arg.split(',').map(number).collect::<Result<_>>()?),
        "geometric" | "point-mass" => WeightSequence::geometric(number(arg)?),
        "sqrt-exp" => WeightSequence::moments(MomentDistribution::SqrtExponential),
        "exponential" => WeightSequence::moments(MomentDistribution::Exponential { rate: number(arg)? }),
        _ => return Err(invalid(format!("unknown weight sequence {spec:?}"))),
    };
    phi.validate()?;
    Ok(phi)
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(number).collect()
}
