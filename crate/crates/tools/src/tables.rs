//! Small user-supplied tables: definitional pairs, word lists, jobs and
//! traits. CSV files may start with a header row; `#` lines are comments.

use gsr_core::data;
use gsr_core::synthetic::{Job, JobTable, TraitTable};
use gsr_core::{DefinitionalPairs, StopList};

use crate::error::{FormatError, Result};

fn records(text: &str, header_first: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| FormatError::BadLine {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        if out.is_empty() && fields[0].eq_ignore_ascii_case(header_first) {
            continue;
        }
        out.push((line, fields));
    }
    Ok(out)
}

fn expect_len(line: usize, fields: &[String], n: usize) -> Result<()> {
    if fields.len() != n {
        return Err(FormatError::BadLine {
            line,
            message: format!("expected {n} columns, found {}", fields.len()),
        });
    }
    Ok(())
}

/// `female,male` rows.
pub fn parse_pairs(text: &str) -> Result<DefinitionalPairs> {
    let mut pairs = Vec::new();
    for (line, f) in records(text, "female")? {
        expect_len(line, &f, 2)?;
        pairs.push((f[0].clone(), f[1].clone()));
    }
    Ok(DefinitionalPairs::new(pairs)?)
}

/// One word per line.
pub fn parse_word_list(text: &str) -> Vec<String> {
    data::word_lines(text).map(str::to_string).collect()
}

pub fn parse_stop_list(text: &str) -> StopList {
    StopList::from_lines(text)
}

/// `group,job,pct_female,pct_male` rows with group `female` or `male`.
pub fn parse_jobs(text: &str) -> Result<JobTable> {
    let mut female = Vec::new();
    let mut male = Vec::new();
    for (line, f) in records(text, "group")? {
        expect_len(line, &f, 4)?;
        let num = |s: &str| {
            s.parse::<f64>().map_err(|_| FormatError::BadLine {
                line,
                message: format!("{s:?} is not a number"),
            })
        };
        let job = Job {
            name: f[1].clone(),
            pct_female: num(&f[2])?,
            pct_male: num(&f[3])?,
        };
        match f[0].to_ascii_lowercase().as_str() {
            "female" => female.push(job),
            "male" => male.push(job),
            g => {
                return Err(FormatError::BadLine {
                    line,
                    message: format!("unknown group {g:?}"),
                })
            }
        }
    }
    Ok(JobTable::new(female, male)?)
}

/// `group,adjective` rows with group `agency` or `communion`.
pub fn parse_traits(text: &str) -> Result<TraitTable> {
    let mut agency = Vec::new();
    let mut communion = Vec::new();
    for (line, f) in records(text, "group")? {
        expect_len(line, &f, 2)?;
        match f[0].to_ascii_lowercase().as_str() {
            "agency" => agency.push(f[1].clone()),
            "communion" => communion.push(f[1].clone()),
            g => {
                return Err(FormatError::BadLine {
                    line,
                    message: format!("unknown group {g:?}"),
                })
            }
        }
    }
    Ok(TraitTable::new(agency, communion)?)
}

pub fn write_jobs(jobs: &JobTable) -> String {
    let mut out = String::from("group,job,pct_female,pct_male\n");
    for j in jobs.female() {
        out.push_str(&format!("female,{},{},{}\n", j.name, j.pct_female, j.pct_male));
    }
    for j in jobs.male() {
        out.push_str(&format!("male,{},{},{}\n", j.name, j.pct_female, j.pct_male));
    }
    out
}

pub fn write_traits(traits: &TraitTable) -> String {
    let mut out = String::from("group,adjective\n");
    for a in traits.agency() {
        out.push_str(&format!("agency,{a}\n"));
    }
    for a in traits.communion() {
        out.push_str(&format!("communion,{a}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_with_header_and_comments() {
        let p = parse_pairs("female,male\n# c\nshe,he\n\nher , his\n").unwrap();
        assert_eq!(p.pairs(), &[("she".into(), "he".into()), ("her".into(), "his".into())]);
        assert!(parse_pairs("she,he\n").is_err());
        assert!(matches!(parse_pairs("a,b\nc\n"), Err(FormatError::BadLine { line: 2, .. })));
    }

    #[test]
    fn bundled_tables_round_trip() {
        let jobs = JobTable::default();
        assert_eq!(parse_jobs(&write_jobs(&jobs)).unwrap(), jobs);
        let traits = TraitTable::default();
        assert_eq!(parse_traits(&write_traits(&traits)).unwrap(), traits);
    }

    #[test]
    fn jobs_validation() {
        assert!(parse_jobs("female,nurse,90,10\nmale,welder,5,95\n").is_ok());
        assert!(parse_jobs("female,nurse,90,20\nmale,welder,5,95\n").is_err());
        assert!(parse_jobs("other,nurse,90,10\n").is_err());
        assert!(parse_traits("agency,proud\ncommunion,proud\n").is_err());
    }
}
