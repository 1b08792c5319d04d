#!/usr/bin/env python3
"""
Main entry point for the Wehrl stability toolkit
"""

import sys

from wehrl.cli import run


def main():
    """Main entry point"""
    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()
