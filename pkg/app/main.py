import json
import sys
from typing import List, Optional

from app.cli.commands import COMMANDS
from app.cli.parser import build_parser
from app.core.exceptions import RadialSystemError
from app.core.logging_config import get_logger

logger = get_logger()


def run_subcommand(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; 0 on success, 2 on config errors, 3 on solver errors."""
    args = build_parser().parse_args(argv)
    log = logger.bind(log_type="cli")
    log.info(f"Command started | {args.command}")

    try:
        artifacts = COMMANDS[args.command](args)
    except RadialSystemError as exc:
        log.error(f"Command failed | {args.command} | {type(exc).__name__}: {exc.detail}")
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return exc.exit_code

    if artifacts.files:
        print(artifacts.model_dump_json())
    log.info(f"Command finished | {args.command} | files={len(artifacts.files)}")
    return 0


def main() -> None:
    sys.exit(run_subcommand())


if __name__ == "__main__":
    main()
