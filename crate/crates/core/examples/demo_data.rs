//! Writes the bundled demo corpus: `cargo run --example demo_data -- data/demo`.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use seedtopic::synthetic::{aspect_term_list, generate, opinion_lexicon, ASPECTS};

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data/demo".into()));
    fs::create_dir_all(&dir)?;

    // four sentences per review line
    let train = generate(2000, 11);
    let reviews: Vec<String> = train
        .chunks(4)
        .map(|c| c.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" "))
        .collect();
    fs::write(dir.join("reviews.txt"), reviews.join("\n") + "\n")?;

    let mut gold = String::new();
    for s in generate(600, 99) {
        let _ = writeln!(gold, "{}\t{}\t{}", s.text, ASPECTS[s.aspect], s.polarity);
    }
    fs::write(dir.join("gold.tsv"), gold)?;

    fs::write(dir.join("lexicon.txt"), opinion_lexicon().join("\n") + "\n")?;
    fs::write(dir.join("aspect_terms.txt"), aspect_term_list().join("\n") + "\n")?;
    fs::write(
        dir.join("config.txt"),
        "# demo restaurant domain\n\
         language: en\n\
         aspect food: chicken\n\
         aspect service: service\n\
         aspect ambience: ambience\n\
         positive: excellent\n\
         negative: horrible\n\
         \n\
         [params]\n\
         # the demo corpus is small; more passes give usable similarities\n\
         embedding_epochs = 20\n",
    )?;
    Ok(())
}
