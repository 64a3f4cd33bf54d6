use std::path::PathBuf;

use epr_optomech::cli::{render, Command, Format, Options};

fn options(format: Option<Format>) -> Options {
    Options {
        config: None,
        out: PathBuf::from("-"),
        fmin: 0.1,
        fmax: 1e5,
        ppd: 50,
        format,
    }
}

fn in_pool(threads: usize, command: &Command, opts: &Options) -> String {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(|| render(command, opts).unwrap())
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    for (command, format) in [
        (Command::Budget, None),
        (Command::Budget, Some(Format::Json)),
        (Command::Band, None),
    ] {
        let opts = options(format);
        let reference = in_pool(1, &command, &opts);
        for threads in [2, 4, 7] {
            assert_eq!(in_pool(threads, &command, &opts), reference, "{command:?} with {threads} threads");
        }
        assert_eq!(render(&command, &opts).unwrap(), reference);
    }
}
