//! Parse a program, inspect its structure, and print the canonical form.
//!
//!     cargo run -p tsorobust --example parse_program

use tsorobust::lang::{parse_program, print_program};

const SOURCE: &str = "
// Two counters guarded by a compare-and-swap lock.
program ticket
domain 0..3;
vars lock count;

thread worker
  regs got tmp;
  init acquire;
  begin
    acquire: got := cas(lock, 0, 1); goto check;
    check:   assume got == 1; goto bump;
    check:   assume got == 0; goto acquire;
    bump:    tmp := count; goto inc;
    inc:     count := tmp + 1; goto release;
    release: lock := 0; goto fin;
  end

thread observer
  regs seen;
  init watch;
  begin
    watch: seen := count; goto watch;
  end
";

fn main() {
    let program = parse_program(SOURCE).expect("the program is well-formed");

    println!("name:    {}", program.name);
    println!("domain:  {}", program.domain);
    println!("shared:  {}", program.shared.join(" "));
    for thread in &program.threads {
        let regs: Vec<_> = thread
            .regs
            .iter()
            .map(|r| program.reg_name(*r).to_string())
            .collect();
        println!(
            "thread {} ({} labels, regs {})",
            thread.name,
            thread.labels.len(),
            regs.join(" ")
        );
    }
    println!("instructions: {}", program.instrs.len());

    // A label may carry several instructions: that is the nondeterministic
    // choice `check` uses to branch on the cas result.
    let choices = program.instructions_of("worker.check").unwrap();
    println!("worker.check has {} instructions", choices.len());

    println!("\ncanonical form:\n{}", print_program(&program));

    // Validation catches malformed programs with positions.
    let bad =
        "program oops vars x;\nthread t regs r; init l0;\nbegin\n  l0: r := x + 1; goto l0;\nend";
    match parse_program(bad) {
        Err(e) => println!("rejected as expected: {e}"),
        Ok(_) => unreachable!("shared variables cannot appear in arithmetic"),
    }
}
