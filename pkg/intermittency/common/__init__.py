"""Shared configuration, error, output and dispatch helpers"""
