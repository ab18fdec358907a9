from django.apps import AppConfig


class GazeConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'gaze'
    verbose_name = 'Eye movement features'
