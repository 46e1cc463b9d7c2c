# Utils package: logging and data file readers
