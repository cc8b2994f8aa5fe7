#!/usr/bin/env python3
from logdoc.cli import main


if __name__ == '__main__':
    main()
