import sys

from ._scorelab import run_cli


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print("usage: score-lab <command> --config <file> [--key value ...]")
        return 0 if argv else 2
    command, rest = argv[0], argv[1:]
    config_text, overrides = "{}", []
    i = 0
    while i < len(rest):
        arg = rest[i]
        if not arg.startswith("--"):
            print(f"unexpected argument: {arg}", file=sys.stderr)
            return 2
        key, _, value = arg[2:].partition("=")
        if not _:
            if i + 1 >= len(rest):
                print(f"missing value for --{key}", file=sys.stderr)
                return 2
            value = rest[i + 1]
            i += 1
        if key == "config":
            with open(value) as fh:
                config_text = fh.read()
        else:
            overrides.append((key, value))
        i += 1
    code, log = run_cli(command, config_text, overrides)
    sys.stdout.write(log)
    return code


if __name__ == "__main__":
    sys.exit(main())
