use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use abl_core::trainer::{read_log_csv, IterationLog};
use serde_json::json;

use crate::commands::{ATTEMPTS_FILE, ATTEMPTS_HEADER, EVAL_HEADER, RUN_MANIFEST};
use crate::manifest::Recorder;
use crate::{failed, invalid, CliError, ReportArgs};

#[derive(Debug, Clone, PartialEq)]
struct Attempt {
    iterations: usize,
    kept: bool,
}

struct Run {
    name: String,
    log: Vec<IterationLog>,
    attempts: Option<Vec<Attempt>>,
}

impl Run {
    /// First iteration of the kept attempt that explained its whole
    /// subsample, counted from the start of the log. Without an attempts
    /// file the whole log is one attempt.
    fn convergence(&self) -> Option<usize> {
        let (start, len) = match &self.attempts {
            Some(attempts) => {
                let kept = attempts.iter().position(|a| a.kept)?;
                let start = attempts[..kept].iter().map(|a| a.iterations).sum();
                (start, attempts[kept].iterations)
            }
            None => (0, self.log.len()),
        };
        self.log
            .iter()
            .skip(start)
            .take(len)
            .find(|e| e.consistency == e.subsample_size)
            .map(|e| e.iteration)
    }
}

fn read_attempts(path: &Path) -> Result<Vec<Attempt>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(ATTEMPTS_HEADER) {
        return Err(invalid(format!("{}: unexpected header", path.display())));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let bad = || invalid(format!("{}: bad row {line:?}", path.display()));
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(bad());
            }
            Ok(Attempt {
                iterations: fields[1].parse().map_err(|_| bad())?,
                kept: fields[3] == "1",
            })
        })
        .collect()
}

fn load_run(path: &Path) -> Result<Run, CliError> {
    let file = File::open(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let log = read_log_csv(BufReader::new(file)).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    if log.is_empty() {
        return Err(invalid(format!("{} has no iterations", path.display())));
    }
    let sibling = path.with_file_name(ATTEMPTS_FILE);
    let attempts = sibling.exists().then(|| read_attempts(&sibling)).transpose()?;
    if let Some(a) = &attempts {
        if a.iter().map(|a| a.iterations).sum::<usize>() != log.len() {
            return Err(invalid(format!("{} does not match {}", sibling.display(), path.display())));
        }
    }
    Ok(Run {
        name: path.display().to_string(),
        log,
        attempts,
    })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_table(path: &Path, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut text = format!("{header}\n");
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| failed(format!("writing {}: {e}", path.display())))
}

pub fn report(args: &ReportArgs, threads: usize) -> Result<(), CliError> {
    let mut recorder = Recorder::start("report", threads);
    let runs: Vec<Run> = args.logs.iter().map(|p| load_run(p)).collect::<Result<_, _>>()?;
    let mut evals = Vec::new();
    for path in &args.evals {
        let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(EVAL_HEADER) {
            return Err(invalid(format!("{}: not an evaluation CSV", path.display())));
        }
        let rows: Vec<String> = lines.filter(|l| !l.trim().is_empty()).map(String::from).collect();
        if rows.is_empty() {
            return Err(invalid(format!("{} has no rows", path.display())));
        }
        evals.push((path.display().to_string(), rows));
    }
    fs::create_dir_all(&args.out).map_err(failed)?;

    let mut perception = Vec::new();
    let mut trials = Vec::new();
    for run in &runs {
        for e in &run.log {
            if let Some(a) = e.perception_accuracy {
                perception.push(format!("{},{},{},{a}", run.name, e.iteration, e.stage));
            }
            trials.push(format!(
                "{},{},{},{},{},{}",
                run.name,
                e.iteration,
                opt(e.perception_accuracy),
                e.consistency,
                e.subsample_size,
                u8::from(e.consistency == e.subsample_size)
            ));
        }
    }

    let first = runs[0].convergence();
    let mut convergence = Vec::new();
    for run in &runs {
        let c = run.convergence();
        let delta = c.zip(first).map(|(c, f)| c as i64 - f as i64);
        let attempts = run.attempts.as_ref().map(Vec::len);
        let kept = run.attempts.as_ref().and_then(|a| a.iter().position(|a| a.kept));
        convergence.push(format!(
            "{},{},{},{},{},{}",
            run.name,
            run.log.len(),
            opt(attempts),
            opt(kept),
            opt(c),
            opt(delta)
        ));
    }

    let files: Vec<(PathBuf, &str, Vec<String>)> = vec![
        (
            args.out.join("perception.csv"),
            "run,iteration,stage,perception_accuracy",
            perception,
        ),
        (
            args.out.join("trials.csv"),
            "run,iteration,perception_accuracy,consistency,subsample_size,success",
            trials,
        ),
        (
            args.out.join("convergence.csv"),
            "run,iterations,attempts,kept_attempt,convergence_iteration,delta_vs_first",
            convergence.clone(),
        ),
    ];
    for (path, header, rows) in &files {
        write_table(path, header, rows)?;
        recorder.output(path);
    }
    if !evals.is_empty() {
        let rows: Vec<String> = evals
            .iter()
            .flat_map(|(name, rows)| rows.iter().map(move |r| format!("{name},{r}")))
            .collect();
        let path = args.out.join("eval.csv");
        write_table(&path, &format!("run,{EVAL_HEADER}"), &rows)?;
        recorder.output(path);
    }

    println!("run,iterations,attempts,kept_attempt,convergence_iteration,delta_vs_first");
    for row in &convergence {
        println!("{row}");
    }
    let config = json!({ "logs": args.logs, "evals": args.evals });
    recorder.finish(&args.out.join(RUN_MANIFEST), config, BTreeMap::new())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(iteration: usize, consistency: usize) -> IterationLog {
        IterationLog {
            iteration,
            stage: 5,
            consistency,
            subsample_size: 5,
            perception_accuracy: None,
            wall_time_ms: 0,
        }
    }

    #[test]
    fn convergence_skips_discarded_attempts() {
        let log = vec![entry(0, 5), entry(1, 0), entry(2, 3), entry(3, 5)];
        let mut run = Run {
            name: "r".into(),
            log,
            attempts: None,
        };
        assert_eq!(run.convergence(), Some(0));
        run.attempts = Some(vec![
            Attempt {
                iterations: 2,
                kept: false,
            },
            Attempt {
                iterations: 2,
                kept: true,
            },
        ]);
        assert_eq!(run.convergence(), Some(3));
    }
}
