"""CLI package"""
from .app import main, build_parser, setup_logging

__all__ = ['main', 'build_parser', 'setup_logging']
