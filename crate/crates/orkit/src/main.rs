fn main() {
    orkit::cli_main();
}
