#!/usr/bin/env python
"""Sinkhorn-Lab - Main Entry Point"""
import sys

from app import main

if __name__ == "__main__":
    sys.exit(main())
