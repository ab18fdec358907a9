import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'roundabout_safety.settings')
django.setup()
