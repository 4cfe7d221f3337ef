"""Entry point for the lane-change DQN command line."""

from lanechange import main


if __name__ == "__main__":
    raise SystemExit(main())
